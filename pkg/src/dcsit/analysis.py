"""Analytic DoF formulas and log-log scaling fits.

The DoF formulas take the CSIT scaling coefficients as any sequence of
numbers (floats, ints or :class:`fractions.Fraction`).  Internally they are
evaluated in rational arithmetic; floats are read through their shortest
decimal representation so that ``0.1`` means ``1/10``.  Pass ``exact=True``
to get the :class:`~fractions.Fraction` result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


class RegimeError(ValueError):
    """Raised when a formula is evaluated outside its CSIT regime."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(repr(float(x)))


def _alphas(alphas) -> list[Fraction]:
    a = [as_fraction(v) for v in alphas]
    if not a:
        raise ValueError("need at least one CSIT scaling coefficient")
    for v in a:
        if v < 0 or v > 1:
            raise ValueError(f"CSIT scaling coefficient {float(v)} outside [0, 1]")
    return a


def _out(value: Fraction, exact: bool):
    return value if exact else float(value)


def weak_threshold(K: int) -> Fraction:
    """Largest alpha_max of the weak CSIT regime, ``1/(1 + K(K-2))``."""
    if K < 2:
        raise ValueError("K must be at least 2")
    return Fraction(1, 1 + K * (K - 2))


def dof_centralized_bound(alphas, K: int | None = None, *, exact: bool = False):
    a = _alphas(alphas)
    K = len(a) if K is None else K
    return _out(1 + (K - 1) * max(a), exact)


def is_weak_regime(alphas, K: int | None = None) -> bool:
    a = _alphas(alphas)
    K = len(a) if K is None else K
    return max(a) <= weak_threshold(K)


def dof_weak(alphas, K: int | None = None, *, exact: bool = False):
    a = _alphas(alphas)
    K = len(a) if K is None else K
    if not is_weak_regime(a, K):
        raise RegimeError(
            f"alpha_max={float(max(a))} exceeds the weak threshold "
            f"{float(weak_threshold(K))} for K={K}"
        )
    return _out(1 + (K - 1) * max(a), exact)


def _check_sorted(a: Sequence[Fraction]) -> None:
    if len(a) != 3:
        raise ValueError("the arbitrary-CSIT formula is for K=3 only")
    if not (a[0] >= a[1] >= a[2]):
        raise ValueError("alphas must be sorted in decreasing order")


def k3_branches(alphas) -> tuple[Fraction, Fraction | None]:
    """Both branch expressions of the 3-user achievable DoF.

    The second value is ``None`` when its denominator vanishes
    (``4*a1 == a2``, only possible at ``a1 = a2 = 0``).
    """
    a = _alphas(alphas)
    _check_sorted(a)
    a1, a2 = a[0], a[1]
    first = 1 + 2 * a1
    den = 4 * a1 - a2
    second = None if den == 0 else 3 * (2 * a1 - a2 + 2 * a1 * a2) / den
    return first, second


def dof_achievable_k3(alphas, *, exact: bool = False):
    first, second = k3_branches(alphas)
    a1 = as_fraction(list(alphas)[0])
    return _out(first if a1 <= Fraction(1, 4) else second, exact)


def dof_baseline(alphas, K: int | None = None, *, exact: bool = False):
    """Conventional distributed ZF with successive decoding."""
    a = _alphas(alphas)
    K = len(a) if K is None else K
    return _out(1 + (K - 1) * min(a), exact)


def phase2_ratio(alpha1, alpha2, *, exact: bool = False):
    """Phase-2 channel uses per phase-1 use, ``(4 a1 - 1)/(1 - a2)``."""
    a1, a2 = as_fraction(alpha1), as_fraction(alpha2)
    if a1 <= Fraction(1, 4):
        return _out(Fraction(0), exact)
    if a2 >= 1:
        raise RegimeError("phase 2 carries no common capacity when alpha2 = 1")
    return _out((4 * a1 - 1) / (1 - a2), exact)


# ---------------------------------------------------------------------------
# Figure curves


@dataclass
class DofCurve:
    label: str
    points: list[tuple[float, float]]
    fixed_params: dict = field(default_factory=dict)
    source: str = "analytic"


def figure_curves(
    alpha2_values: Iterable[float] = (0.0, 0.25, 0.5, 0.75),
    K: int = 3,
    alpha3: float = 0.0,
    alpha1_grid: Sequence[float] | None = None,
) -> list[DofCurve]:
    if K != 3:
        raise ValueError("the figure is defined for K=3")
    if alpha1_grid is None:
        alpha1_grid = [i / 100 for i in range(101)]
    grid = [float(a) for a in alpha1_grid]
    curves = []
    for a2 in alpha2_values:
        a2 = float(a2)
        pts = [
            (a1, dof_achievable_k3((a1, a2, min(alpha3, a2))))
            for a1 in grid
            if as_fraction(a1) >= as_fraction(a2)
        ]
        curves.append(
            DofCurve(f"achievable_a2={a2:g}", pts, {"alpha2": a2, "alpha3": alpha3, "K": K})
        )
    curves.append(
        DofCurve(
            "centralized_bound",
            [(a1, dof_centralized_bound((a1, 0.0, 0.0), K)) for a1 in grid],
            {"K": K},
        )
    )
    curves.append(
        DofCurve(
            "baseline_zf",
            [(a1, dof_baseline((a1, 0.0, alpha3), K)) for a1 in grid],
            {"alpha2": 0.0, "alpha3": alpha3, "K": K},
        )
    )
    return curves


# ---------------------------------------------------------------------------
# Scaling fits


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    dropped: int = 0


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return float(slope), float(intercept), r2


def _select(samples, window):
    pts = [(float(p), float(y)) for p, y in samples]
    if window is not None:
        lo, hi = window
        pts = [(p, y) for p, y in pts if lo * (1 - 1e-12) <= p <= hi * (1 + 1e-12)]
    return pts


def fit_exponent(samples, window: tuple[float, float] | None = None) -> ScalingFit:
    """Least-squares slope of ``log10 y`` against ``log10 P``.

    Nonpositive or non-finite ``y`` are dropped (and counted).
    """
    pts = _select(samples, window)
    good = [(p, y) for p, y in pts if p > 0 and y > 0 and math.isfinite(y)]
    dropped = len(pts) - len(good)
    if dropped:
        warnings.warn(f"fit_exponent dropped {dropped} nonpositive sample(s)", RuntimeWarning)
    if len(good) < 3:
        raise ValueError(f"need at least 3 usable points, got {len(good)}")
    P = np.array([p for p, _ in good])
    y = np.array([v for _, v in good])
    slope, icpt, r2 = _ols(np.log10(P), np.log10(y))
    return ScalingFit(slope, icpt, r2, (float(P.min()), float(P.max())), len(good), dropped)


def fit_log_mean_exponent(P_values, log10_means, window=None) -> ScalingFit:
    """Exponent fit when the per-point statistic is already a mean of log10.

    This is the geometric-mean version of :func:`fit_exponent`; it is the
    robust choice for heavy-tailed quantities such as leakage powers.
    """
    return fit_exponent([(p, 10.0 ** m) for p, m in zip(P_values, log10_means)], window)


def fit_dof_slope(samples, window: tuple[float, float] | None = None) -> ScalingFit:
    """Least-squares slope of a rate (bits) against ``log2 P``: the empirical DoF."""
    pts = _select(samples, window)
    good = [(p, r) for p, r in pts if p > 0 and math.isfinite(r)]
    dropped = len(pts) - len(good)
    if len(good) < 3:
        raise ValueError(f"need at least 3 usable points, got {len(good)}")
    P = np.array([p for p, _ in good])
    r = np.array([v for _, v in good])
    slope, icpt, r2 = _ols(np.log2(P), r)
    return ScalingFit(slope, icpt, r2, (float(P.min()), float(P.max())), len(good), dropped)


def top_window(P_grid: Sequence[float], decades: float) -> tuple[float, float]:
    """The ``decades``-wide window ending at the largest grid point."""
    hi = max(P_grid)
    return hi / 10.0**decades, hi
