"""Array-based decision tree engine.

Two builders share the vectorized split search:

* classification trees (gini / entropy impurity, weighted samples) for
  the decision-tree, random-forest and adaptive-boosting families;
* gradient trees (second-order gain with L2 leaf regularization) for the
  gradient-boosted families.

Trees are stored as flat arrays (feature, threshold, children, leaf
payload), which makes prediction a vectorized descent and serialization
trivial. Split ties are broken by lowest feature index, then lowest
threshold; split search depends only on the multiset of rows, so a tree
fit is invariant to training-row order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LEAF = -1
_GAIN_EPS = 1e-12


@dataclass
class Tree:
    feature: np.ndarray    # (n_nodes,) int, _LEAF for leaves
    threshold: np.ndarray  # (n_nodes,) float
    left: np.ndarray       # (n_nodes,) int
    right: np.ndarray      # (n_nodes,) int
    value: np.ndarray      # (n_nodes, v) leaf payload (class dist or leaf weight)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index for every row of X."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = self.feature[node] != _LEAF
        while np.any(active):
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] != _LEAF
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_params(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }

    @classmethod
    def from_params(cls, params: dict) -> "Tree":
        return cls(**params)


class _TreeBuffer:
    """Append-only node storage while a tree is grown."""

    def __init__(self, value_width: int) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []
        self._vw = value_width

    def add(self, value: np.ndarray) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(np.asarray(value, dtype=np.float64))
        return len(self.feature) - 1

    def split(self, node: int, feature: int, threshold: float, left: int, right: int) -> None:
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = left
        self.right[node] = right

    def build(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.intp),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.intp),
            right=np.asarray(self.right, dtype=np.intp),
            value=np.vstack(self.value).reshape(len(self.feature), self._vw),
        )


def _split_candidates(Xn: np.ndarray):
    """Column-wise sort of a node's rows. Returns (order, sorted values,
    boolean mask of positions where value strictly increases)."""
    order = np.argsort(Xn, axis=0, kind="stable")
    vs = np.take_along_axis(Xn, order, axis=0)
    valid = vs[:-1] < vs[1:]
    return order, vs, valid


def _pick_best(gains: np.ndarray, vs: np.ndarray, feat_ids: np.ndarray):
    """Best (gain, feature, threshold) from a (n-1, d) gain table.

    argmax scans ascending positions and features, so exact ties resolve
    to the lowest threshold within a feature and the lowest feature index
    across features.
    """
    col_best_pos = np.argmax(gains, axis=0)
    col_best = gains[col_best_pos, np.arange(gains.shape[1])]
    f = int(np.argmax(col_best))
    gain = float(col_best[f])
    if not np.isfinite(gain) or gain <= _GAIN_EPS:
        return None
    pos = int(col_best_pos[f])
    thr = 0.5 * (vs[pos, f] + vs[pos + 1, f])
    # Guard against midpoint rounding onto the upper value.
    if thr >= vs[pos + 1, f]:
        thr = vs[pos, f]
    return gain, int(feat_ids[f]), float(thr)


# ---------------------------------------------------------------------------
# Classification trees


def _weighted_impurity(w1: np.ndarray, w: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity scaled by node weight: w * impurity(p). Vectorized."""
    w0 = w - w1
    if criterion == "gini":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = w - (w0 * w0 + w1 * w1) / w
        return np.where(w > 0, out, 0.0)
    # entropy (log_loss is the same argmax)
    out = np.zeros_like(np.asarray(w, dtype=np.float64))
    for part in (w0, w1):
        with np.errstate(divide="ignore", invalid="ignore"):
            term = part * np.log2(w / part)
        out = out + np.where(part > 0, term, 0.0)
    return out


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray,
    criterion: str = "gini",
    max_depth: int | None = None,
    min_samples_split: int = 2,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Greedy binary classification tree; y must be 0/1.

    `max_features`, when set, samples that many candidate features per
    node from `rng` (random-forest mode). Leaf payload is the weighted
    class distribution (p0, p1).
    """
    if criterion == "log_loss":
        criterion = "entropy"
    if criterion not in ("gini", "entropy"):
        raise ValueError(f"unknown criterion {criterion!r}")
    n, d = X.shape
    wy = sample_weight * y
    buf = _TreeBuffer(value_width=2)

    def leaf_value(idx: np.ndarray) -> np.ndarray:
        w = sample_weight[idx].sum()
        w1 = wy[idx].sum()
        if w <= 0:
            return np.array([0.5, 0.5])
        return np.array([(w - w1) / w, w1 / w])

    def grow(idx: np.ndarray, depth: int) -> int:
        node = buf.add(leaf_value(idx))
        w = sample_weight[idx].sum()
        w1 = wy[idx].sum()
        if (
            idx.size < min_samples_split
            or (max_depth is not None and depth >= max_depth)
            or w1 <= 0
            or w1 >= w
        ):
            return node
        if max_features is not None and max_features < d:
            feat_ids = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feat_ids = np.arange(d)
        Xn = X[np.ix_(idx, feat_ids)]
        order, vs, valid = _split_candidates(Xn)
        if not np.any(valid):
            return node
        ws = sample_weight[idx][order]
        w1s = wy[idx][order]
        cw = np.cumsum(ws, axis=0)[:-1]
        cw1 = np.cumsum(w1s, axis=0)[:-1]
        parent = _weighted_impurity(np.array([w1]), np.array([w]), criterion)[0]
        child = _weighted_impurity(cw1, cw, criterion) + _weighted_impurity(
            w1 - cw1, w - cw, criterion
        )
        gains = np.where(valid, parent - child, -np.inf)
        best = _pick_best(gains, vs, feat_ids)
        if best is None:
            return node
        _, feat, thr = best
        go_left = X[idx, feat] <= thr
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        buf.split(node, feat, thr, left, right)
        return node

    grow(np.arange(n, dtype=np.intp), 0)
    return buf.build()


# ---------------------------------------------------------------------------
# Gradient trees (second-order boosting)


def _grad_gain(gl, hl, g, h, reg_lambda):
    gr = g - gl
    hr = h - hl
    score = lambda G, H: (G * G) / (H + reg_lambda)  # noqa: E731
    with np.errstate(divide="ignore", invalid="ignore"):
        return 0.5 * (score(gl, hl) + score(gr, hr) - score(g, h))


def _grad_node_stats(idx, grad, hess):
    return grad[idx].sum(), hess[idx].sum()


def _grad_best_split(
    X, grad, hess, idx, feat_ids, reg_lambda, min_child_weight
):
    Xn = X[np.ix_(idx, feat_ids)]
    order, vs, valid = _split_candidates(Xn)
    if not np.any(valid):
        return None
    gs = grad[idx][order]
    hs = hess[idx][order]
    cg = np.cumsum(gs, axis=0)[:-1]
    ch = np.cumsum(hs, axis=0)[:-1]
    g, h = grad[idx].sum(), hess[idx].sum()
    ok = valid & (ch >= min_child_weight) & ((h - ch) >= min_child_weight)
    if not np.any(ok):
        return None
    gains = np.where(ok, _grad_gain(cg, ch, g, h, reg_lambda), -np.inf)
    return _pick_best(gains, vs, feat_ids)


def _leaf_weight(g: float, h: float, reg_lambda: float, clip: float) -> float:
    if h + reg_lambda <= 0:
        return 0.0
    return float(np.clip(-g / (h + reg_lambda), -clip, clip))


def grow_gradient_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    reg_lambda: float = 0.0,
    max_depth: int | None = 3,
    min_child_weight: float = 0.0,
    max_leaves: int | None = None,
    leaf_clip: float = 10.0,
    feat_ids: np.ndarray | None = None,
) -> Tree:
    """Second-order regression tree on (gradient, hessian) statistics.

    Depth-wise growth by default; `max_leaves` switches to leaf-wise
    growth (the highest-gain leaf is split first) under the leaf budget.
    Leaf payload is the regularized Newton weight -G/(H+lambda).
    """
    n, d = X.shape
    if feat_ids is None:
        feat_ids = np.arange(d)
    buf = _TreeBuffer(value_width=1)

    def make_leaf(idx):
        g, h = _grad_node_stats(idx, grad, hess)
        return buf.add(np.array([_leaf_weight(g, h, reg_lambda, leaf_clip)]))

    if max_leaves is None:
        def grow(idx: np.ndarray, depth: int) -> int:
            node = make_leaf(idx)
            if max_depth is not None and depth >= max_depth:
                return node
            best = _grad_best_split(
                X, grad, hess, idx, feat_ids, reg_lambda, min_child_weight
            )
            if best is None:
                return node
            _, feat, thr = best
            go_left = X[idx, feat] <= thr
            left = grow(idx[go_left], depth + 1)
            right = grow(idx[~go_left], depth + 1)
            buf.split(node, feat, thr, left, right)
            return node

        grow(np.arange(n, dtype=np.intp), 0)
        return buf.build()

    # Leaf-wise growth: candidates kept as (node, idx, depth, best split).
    root_idx = np.arange(n, dtype=np.intp)
    root = make_leaf(root_idx)
    candidates: list[tuple[int, np.ndarray, int, tuple]] = []

    def consider(node: int, idx: np.ndarray, depth: int) -> None:
        if max_depth is not None and depth >= max_depth:
            return
        best = _grad_best_split(
            X, grad, hess, idx, feat_ids, reg_lambda, min_child_weight
        )
        if best is not None:
            candidates.append((node, idx, depth, best))

    consider(root, root_idx, 0)
    n_leaves = 1
    while candidates and n_leaves < max_leaves:
        # Highest gain wins; ties resolve to the earliest-created node.
        pick = max(range(len(candidates)), key=lambda i: candidates[i][3][0])
        if pick != min(
            (i for i in range(len(candidates))
             if candidates[i][3][0] >= candidates[pick][3][0] - _GAIN_EPS),
            default=pick,
        ):
            pick = min(
                i for i in range(len(candidates))
                if candidates[i][3][0] >= candidates[pick][3][0] - _GAIN_EPS
            )
        node, idx, depth, (gain, feat, thr) = candidates.pop(pick)
        go_left = X[idx, feat] <= thr
        li, ri = idx[go_left], idx[~go_left]
        left = make_leaf(li)
        right = make_leaf(ri)
        buf.split(node, feat, thr, left, right)
        n_leaves += 1
        consider(left, li, depth + 1)
        consider(right, ri, depth + 1)
    return buf.build()
