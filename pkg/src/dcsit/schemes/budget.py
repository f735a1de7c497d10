"""Exponent-level side-information budget of the common symbol."""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from ..analysis import as_fraction


class Budget(NamedTuple):
    required_exponent: Fraction
    capacity_exponent: Fraction
    feasible: bool
    fresh_exponent: Fraction


def interference_terms(K: int, mode: str = "zf") -> int:
    """Number of quantized interference terms sent per channel use.

    ``"zf"``: AP-ZF removes one interferer per user, leaving ``K(K-2)``.
    ``"toy"``: no precoding, every cross term is sent, ``K(K-1)``.
    """
    if mode == "zf":
        return K * (K - 2)
    if mode == "toy":
        return K * (K - 1)
    raise ValueError(f"unknown budget mode {mode!r}")


def side_info_budget(K: int, alpha1, mode: str = "zf") -> Budget:
    a = as_fraction(alpha1)
    if not 0 <= a <= 1:
        raise ValueError("alpha1 must lie in [0, 1]")
    required = interference_terms(K, mode) * a
    capacity = 1 - a
    fresh = max(capacity - required, Fraction(0))
    return Budget(required, capacity, required <= capacity, fresh)
