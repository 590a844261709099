"""Physical egg-quality formulas and categorical label derivation.

Shape index and yolk index are dimensionless percentages; the Haugh unit
is a log-scale interior-quality score. Grade bands (AA/A/B/C) come from
the Haugh unit, freshness bands (Fresh/ModeratelyFresh/Old) from the yolk
index, and each is collapsed to the binary target used for training.

All functions here are pure and safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .errors import HaughDomainError, InvalidMeasurementError

# Freshness bands on the yolk index: Fresh above 38, Old below 34.5,
# ModeratelyFresh on the closed interval between them.
YI_FRESH_ABOVE = 38.0
YI_OLD_BELOW = 34.5

# Grade bands on the Haugh unit.
HU_GRADE_AA = 72.0
HU_GRADE_A = 60.0
HU_GRADE_B = 31.0


class Market(str, Enum):
    WM = "WM"  # wholesale market
    SS = "SS"  # super shop
    GS = "GS"  # grocery shop
    OS = "OS"  # open shop


class Grade4(str, Enum):
    AA = "AA"
    A = "A"
    B = "B"
    C = "C"


class Grade2(str, Enum):
    High = "High"
    Low = "Low"


class Fresh3(str, Enum):
    Fresh = "Fresh"
    ModeratelyFresh = "ModeratelyFresh"
    Old = "Old"


class Fresh2(str, Enum):
    Fresh = "Fresh"
    Old = "Old"


@dataclass(frozen=True)
class EggMeasurement:
    """Raw per-egg physical record.

    Dimensional fields are strictly positive except yolk_height and
    albumen_height, which may be zero (fully collapsed yolk/albumen).
    Weight is grams, the remaining lengths millimeters.
    """

    egg_id: str
    market: Market
    weight: float
    width: float
    length: float
    yolk_height: float
    yolk_diameter: float
    albumen_height: float

    def __post_init__(self) -> None:
        for name in ("weight", "width", "length", "yolk_diameter"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise InvalidMeasurementError(
                    f"egg {self.egg_id!r}: {name} must be finite and > 0, got {v}"
                )
        for name in ("yolk_height", "albumen_height"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidMeasurementError(
                    f"egg {self.egg_id!r}: {name} must be finite and >= 0, got {v}"
                )


@dataclass(frozen=True)
class DerivedMetrics:
    shape_index: float
    yolk_index: float
    haugh_unit: float


def shape_index(width: float, length: float) -> float:
    """100 * width / length. Values above 100 (width measured longer than
    length, usually an axis swap in field data) are accepted with a warning."""
    _require_positive("width", width)
    _require_positive("length", length)
    si = 100.0 * width / length
    if si > 100.0:
        warnings.warn(
            f"shape index {si:.2f} > 100: width exceeds length, possible axis swap",
            stacklevel=2,
        )
    return si


def yolk_index(yolk_height: float, yolk_diameter: float) -> float:
    """100 * yolk height / yolk diameter."""
    _require_positive("yolk_diameter", yolk_diameter)
    _require_nonnegative("yolk_height", yolk_height)
    return 100.0 * yolk_height / yolk_diameter


def haugh_unit(albumen_height: float, weight: float) -> float:
    """100 * log10(H + 7.6 - 1.7 * W**0.37).

    Raises HaughDomainError when the log argument is non-positive; such
    records are excluded upstream rather than clamped, to avoid
    fabricating labels for physically degenerate albumen measurements.
    """
    _require_positive("weight", weight)
    _require_nonnegative("albumen_height", albumen_height)
    arg = albumen_height + 7.6 - 1.7 * weight**0.37
    if arg <= 0:
        raise HaughDomainError(
            f"Haugh-unit log argument {arg:.4g} <= 0 "
            f"(albumen_height={albumen_height}, weight={weight})"
        )
    return 100.0 * math.log10(arg)


def derive_metrics(m: EggMeasurement) -> DerivedMetrics:
    return DerivedMetrics(
        shape_index=shape_index(m.width, m.length),
        yolk_index=yolk_index(m.yolk_height, m.yolk_diameter),
        haugh_unit=haugh_unit(m.albumen_height, m.weight),
    )


def freshness_label(yi: float) -> Fresh3:
    """Fresh if YI > 38, ModeratelyFresh if 34.5 <= YI <= 38, Old below."""
    if not math.isfinite(yi):
        raise InvalidMeasurementError(f"yolk index must be finite, got {yi}")
    if yi > YI_FRESH_ABOVE:
        return Fresh3.Fresh
    if yi >= YI_OLD_BELOW:
        return Fresh3.ModeratelyFresh
    return Fresh3.Old


def grade_label(hu: float) -> Grade4:
    """AA if HU >= 72, A if 60 <= HU < 72, B if 31 <= HU < 60, else C."""
    if not math.isfinite(hu):
        raise InvalidMeasurementError(f"Haugh unit must be finite, got {hu}")
    if hu >= HU_GRADE_AA:
        return Grade4.AA
    if hu >= HU_GRADE_A:
        return Grade4.A
    if hu >= HU_GRADE_B:
        return Grade4.B
    return Grade4.C


def collapse_grade(g: Grade4) -> Grade2:
    """AA and A collapse to High; B and C to Low."""
    return Grade2.High if g in (Grade4.AA, Grade4.A) else Grade2.Low


def collapse_freshness(f: Fresh3) -> Fresh2:
    """Fresh and ModeratelyFresh collapse to Fresh; Old stays Old."""
    return Fresh2.Old if f is Fresh3.Old else Fresh2.Fresh


def _require_positive(name: str, v: float) -> None:
    if not math.isfinite(v) or v <= 0:
        raise InvalidMeasurementError(f"{name} must be finite and > 0, got {v}")


def _require_nonnegative(name: str, v: float) -> None:
    if not math.isfinite(v) or v < 0:
        raise InvalidMeasurementError(f"{name} must be finite and >= 0, got {v}")
