"""Signal-level simulations of the transmission schemes."""

from __future__ import annotations

from ._common import SCHEMES, TERM_EXPONENTS, Draws, PhasePlan, RateReport, SchemeConfig, TransmissionTrace
from .arbitrary import arbitrary_draws, run_arbitrary_k3, simulate_arbitrary
from .baseline import baseline_draws, run_baseline_zf, simulate_baseline
from .budget import Budget, interference_terms, side_info_budget
from .toy import run_toy, simulate_toy, toy_draws
from .weak import run_weak, simulate_weak, weak_draws


def scheme_draws(scheme: str, seed: int, trials: int, K: int, symbols: int) -> Draws:
    if scheme == "weak":
        return weak_draws(seed, trials, K, symbols)
    if scheme == "toy":
        return toy_draws(seed, trials, symbols)
    if scheme == "arbitrary_k3":
        return arbitrary_draws(seed, trials, symbols)
    if scheme == "baseline_zf":
        return baseline_draws(seed, trials, K, symbols)
    raise ValueError(f"unknown scheme {scheme!r}")


def simulate(cfg: SchemeConfig, draws: Draws | None = None, **kw) -> RateReport:
    fn = {
        "weak": simulate_weak,
        "toy": simulate_toy,
        "arbitrary_k3": simulate_arbitrary,
        "baseline_zf": simulate_baseline,
    }[cfg.scheme]
    return fn(cfg, draws, **kw)


def sweep(scheme: str, K: int, alphas, P_grid, trials: int = 1000, seed: int = 0, symbols: int = 32, clip_sigmas: float = 4.0, **kw) -> list[RateReport]:
    """Run a scheme over a power grid with common random numbers across ``P``."""
    draws = scheme_draws(scheme, seed, trials, K, symbols)
    return [
        simulate(SchemeConfig(scheme, K, tuple(alphas), float(P), trials, seed, symbols, clip_sigmas), draws, **kw)
        for P in P_grid
    ]


__all__ = [
    "SCHEMES", "TERM_EXPONENTS", "Budget", "Draws", "PhasePlan", "RateReport", "SchemeConfig",
    "TransmissionTrace", "interference_terms", "run_arbitrary_k3", "run_baseline_zf", "run_toy",
    "run_weak", "scheme_draws", "side_info_budget", "simulate", "sweep",
]
