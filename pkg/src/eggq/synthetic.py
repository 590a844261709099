"""Deterministic synthetic stand-in for the published egg dataset.

The original measurement records and images are distributed with the
reference study; this generator reproduces their published summary
structure so the pipeline can run end-to-end offline: 186 eggs with the
exact class splits (78 High / 108 Low grade, 90 Fresh / 96 Old
freshness), the per-group market composition, and group-level ranges and
moments for weight, shape index, yolk index, and Haugh unit. Image
feature matrices are simulated as nonnegative pooled-activation-like
columns driven by latent quality signals plus a decaying noise spectrum.

Everything is a pure function of the seed.
"""

from __future__ import annotations

import zlib
from pathlib import Path

import numpy as np

from .data import FeatureMatrix, MatrixKind, save_feature_matrix

N_HIGH = 78          # grade High (all of these are also Fresh)
N_LOW_FRESH = 12     # grade Low but freshness Fresh
N_LOW_OLD = 96       # grade Low and Old
N_TOTAL = N_HIGH + N_LOW_FRESH + N_LOW_OLD

# Market composition per grade group: (GS, OS, SS, WM).
MARKETS_HIGH = ("GS",) * 17 + ("OS",) * 27 + ("SS",) * 11 + ("WM",) * 23
MARKETS_LOW = ("GS",) * 28 + ("OS",) * 26 + ("SS",) * 33 + ("WM",) * 21

MEASUREMENTS_HEADER = (
    "egg_id,market,weight_g,width_mm,length_mm,"
    "yolk_height_mm,yolk_diameter_mm,albumen_height_mm"
)


def _trunc_normal(rng, mean, sd, lo, hi, size):
    out = np.empty(size)
    need = np.arange(size)
    while need.size:
        draw = rng.normal(mean, sd, size=need.size)
        ok = (draw >= lo) & (draw <= hi)
        out[need[ok]] = draw[ok]
        need = need[~ok]
    return out


def generate_measurement_rows(seed: int = 20240101) -> list[dict]:
    """186 egg records whose derived labels hit the published splits."""
    rng = np.random.default_rng(seed)

    # Target quality scores per subgroup (grade from HU, freshness from YI).
    hu = np.concatenate([
        _trunc_normal(rng, 77.91, 9.18, 61.10, 104.50, N_HIGH),
        _trunc_normal(rng, 50.0, 7.0, 33.0, 59.70, N_LOW_FRESH),
        _trunc_normal(rng, 40.0, 13.0, 1.80, 59.70, N_LOW_OLD),
    ])
    yi = np.concatenate([
        _trunc_normal(rng, 38.66, 2.57, 34.79, 50.12, N_HIGH),
        _trunc_normal(rng, 35.8, 0.8, 34.54, 37.25, N_LOW_FRESH),
        _trunc_normal(rng, 24.7, 7.2, 1.91, 34.33, N_LOW_OLD),
    ])
    weight = np.concatenate([
        _trunc_normal(rng, 60.13, 4.69, 47.69, 77.15, N_HIGH),
        _trunc_normal(rng, 58.92, 4.57, 44.78, 70.30, N_LOW_FRESH + N_LOW_OLD),
    ])
    si = np.concatenate([
        _trunc_normal(rng, 78.84, 3.82, 69.54, 96.00, N_HIGH),
        _trunc_normal(rng, 77.47, 3.15, 71.91, 96.21, N_LOW_FRESH + N_LOW_OLD),
    ])
    market = np.array(MARKETS_HIGH + MARKETS_LOW)

    # Invert the formulas back to raw caliper/scale measurements.
    length = _trunc_normal(rng, 55.0, 2.0, 50.0, 62.0, N_TOTAL)
    width = si * length / 100.0
    yolk_diameter = _trunc_normal(rng, 40.0, 2.5, 33.0, 47.0, N_TOTAL)
    yolk_height = yi * yolk_diameter / 100.0
    albumen_height = 10.0 ** (hu / 100.0) - 7.6 + 1.7 * weight**0.37

    order = rng.permutation(N_TOTAL)
    rows = []
    for pos, i in enumerate(order, start=1):
        rows.append(
            {
                "egg_id": f"egg{pos:03d}",
                "market": market[i],
                "weight_g": round(float(weight[i]), 4),
                "width_mm": round(float(width[i]), 4),
                "length_mm": round(float(length[i]), 4),
                "yolk_height_mm": round(float(yolk_height[i]), 4),
                "yolk_diameter_mm": round(float(yolk_diameter[i]), 4),
                "albumen_height_mm": round(float(albumen_height[i]), 4),
            }
        )
    return rows


def write_measurements_csv(path: str | Path, seed: int = 20240101) -> Path:
    path = Path(path)
    rows = generate_measurement_rows(seed)
    with path.open("w") as fh:
        fh.write(MEASUREMENTS_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r['egg_id']},{r['market']},{r['weight_g']},{r['width_mm']},"
                f"{r['length_mm']},{r['yolk_height_mm']},{r['yolk_diameter_mm']},"
                f"{r['albumen_height_mm']}\n"
            )
    return path


def simulate_image_features(
    rows: list[dict], n_columns: int, tag: str, seed: int = 20240101,
    signal_strength: float = 1.6, signal_noise: float = 1.3,
) -> FeatureMatrix:
    """Pooled-activation-like features carrying latent quality signal.

    Columns are softplus-transformed mixtures of standardized quality
    scores (Haugh unit, yolk index, weight, shape index) and latent noise
    directions with a decaying spectrum, so PCA concentrates variance in
    roughly the first ~60% of the available directions. ``signal_noise``
    corrupts the quality scores per row *before* they are broadcast
    across columns, which caps how much label information the feature
    matrix can carry no matter how many columns are exported — keeping
    downstream cross-validated accuracy in a realistic band instead of
    saturating. Each extractor tag gets an independent corruption, so
    combining extractors genuinely helps an ensemble.
    """
    rng = np.random.default_rng([seed, zlib.crc32(tag.encode())])
    n = len(rows)

    weight = np.array([r["weight_g"] for r in rows])
    si = np.array([100.0 * r["width_mm"] / r["length_mm"] for r in rows])
    yi = np.array([100.0 * r["yolk_height_mm"] / r["yolk_diameter_mm"] for r in rows])
    hu = 100.0 * np.log10(
        np.array([r["albumen_height_mm"] for r in rows]) + 7.6 - 1.7 * weight**0.37
    )

    def std(v):
        return (v - v.mean()) / v.std()

    signals = np.column_stack([std(hu), std(yi), std(weight), std(si)])
    signals = signals + rng.normal(scale=signal_noise, size=signals.shape)
    gains = signal_strength * rng.uniform(0.6, 1.0, size=4)

    n_latent = min(n - 1, 128)
    latent_scale = 1.2 * np.arange(1, n_latent + 1) ** -0.55
    latent = rng.normal(size=(n, n_latent)) * latent_scale

    T = np.hstack([signals * gains, latent])
    W = rng.normal(size=(T.shape[1], n_columns)) / np.sqrt(T.shape[1])
    raw = T @ W + rng.normal(scale=0.08, size=(n, n_columns)) + 0.8
    values = np.logaddexp(0.0, raw)  # softplus keeps activations nonnegative

    return FeatureMatrix(
        egg_ids=tuple(r["egg_id"] for r in rows),
        columns=tuple(f"f{i}" for i in range(n_columns)),
        values=values,
        kind=MatrixKind.image,
    )


def write_feature_csvs(
    out_dir: str | Path,
    backbones: dict[str, int],
    seed: int = 20240101,
) -> dict[str, Path]:
    """Measurement CSV plus one simulated feature CSV per backbone tag."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = generate_measurement_rows(seed)
    write_measurements_csv(out_dir / "measurements.csv", seed)
    paths = {"measurements": out_dir / "measurements.csv"}
    for tag, dim in backbones.items():
        fm = simulate_image_features(rows, dim, tag, seed)
        p = out_dir / f"features_{tag}.csv"
        save_feature_matrix(fm, p)
        paths[tag] = p
    return paths
