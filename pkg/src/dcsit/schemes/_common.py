"""Shared plumbing for the scheme simulations: configs, reports, draws, rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import rng as rngmod
from ..model import TrialBatch, as_scaling
from ..quantization import quantize_array

LN2 = math.log(2.0)
SCHEMES = ("toy", "weak", "arbitrary_k3", "baseline_zf")

# annotated power exponent of each labeled received term, as a function of
# the private-layer exponent
TERM_EXPONENTS = {
    "common": lambda a: 1.0,
    "desired": lambda a: a,
    "interference": lambda a: a,
    "residual": lambda a: 0.0,
}


def annotate(labels, a: float, prefix: str = "") -> dict[str, float]:
    return {prefix + k: float(TERM_EXPONENTS[k](a)) for k in labels}


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str
    K: int
    alphas: tuple[float, ...]
    P: float
    trials: int = 1000
    seed: int = 0
    symbols: int = 32
    clip_sigmas: float = 4.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        a = as_scaling(self.alphas)
        if a.K != self.K:
            raise ValueError(f"need {self.K} CSIT coefficients, got {a.K}")
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if not self.P > 0:
            raise ValueError("P must be positive")
        if self.trials < 1 or self.symbols < 1:
            raise ValueError("trials and symbols must be positive")
        if self.scheme in ("toy", "arbitrary_k3") and self.K != 3:
            raise ValueError(f"scheme {self.scheme!r} requires K=3")
        object.__setattr__(self, "alphas", a.alphas)


@dataclass
class RateReport:
    """Rates of one scheme run at one power level.

    Rates are bits per channel use averaged over the plan; bit counts are
    totals over one plan (one channel use, or ``channel_uses`` for the
    two-phase scheme).
    """

    scheme: str
    P: float
    trials: int
    per_user_private_rate: tuple[float, ...]
    common_rate: float
    side_info_bits_required: float
    fresh_common_bits: float
    sum_rate: float
    channel_uses: float
    feasible: bool
    side_info_fits: bool
    sum_rate_stderr: float = 0.0
    private_exponent: float = 0.0
    term_log10_power: dict = field(default_factory=dict)
    term_exponent: dict = field(default_factory=dict)
    common_sinr_log10: float = float("nan")
    residual_log10_power: float = float("nan")
    notes: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "P": self.P,
            "trials": self.trials,
            "per_user_private_rate": list(self.per_user_private_rate),
            "common_rate": self.common_rate,
            "side_info_bits_required": self.side_info_bits_required,
            "fresh_common_bits": self.fresh_common_bits,
            "sum_rate": self.sum_rate,
            "sum_rate_stderr": self.sum_rate_stderr,
            "channel_uses": self.channel_uses,
            "feasible": self.feasible,
            "side_info_fits": self.side_info_fits,
            "private_exponent": self.private_exponent,
            "term_log10_power": dict(self.term_log10_power),
            "term_exponent": dict(self.term_exponent),
            "common_sinr_log10": self.common_sinr_log10,
            "residual_log10_power": self.residual_log10_power,
            "notes": dict(self.notes),
        }


@dataclass
class TransmissionTrace:
    """Sample-level record of one channel use for a block of trials.

    Arrays are indexed ``(trial, user, symbol_time)``; ``transmitted`` is
    ``(trial, tx, symbol_time)``.  ``received`` is built as the sum of the
    labeled ``terms`` (in insertion order) plus ``noise``.
    """

    transmitted: np.ndarray
    terms: dict[str, np.ndarray]
    noise: np.ndarray
    received: np.ndarray
    side_info_pairs: list[tuple[int, int]] = field(default_factory=list)
    side_info_payload: np.ndarray | None = None
    side_info_reconstruction: np.ndarray | None = None
    side_info_bits_per_term: int = 0


@dataclass(frozen=True)
class PhasePlan:
    """Repetitions of phase 1 (``n1``) and phase 2 (``n2``) of the 3-user scheme."""

    n1: int
    n2: int
    fractional_ratio: float

    @property
    def ratio(self) -> float:
        return self.n2 / self.n1

    @classmethod
    def for_alphas(cls, alphas, n1: int = 1000) -> "PhasePlan":
        """Smallest ``n2`` with ``n2/n1`` at least the phase-2 duration ratio."""
        from ..analysis import as_fraction, phase2_ratio

        exact = phase2_ratio(alphas[0], alphas[1], exact=True)
        n2 = math.ceil(exact * n1)
        return cls(n1, n2, float(exact))

    def validate(self, alphas, gap: float) -> None:
        from ..analysis import phase2_ratio

        target = phase2_ratio(alphas[0], alphas[1])
        if self.n1 < 1 or self.n2 < 0:
            raise ValueError("phase plan needs n1 >= 1 and n2 >= 0")
        if target > 0 and self.n2 < 1:
            raise ValueError("outside the weak regime both phases must be used")
        if abs(self.fractional_ratio - target) > 1e-12:
            raise ValueError("phase plan was built for different alphas")
        if abs(self.ratio - target) > gap:
            raise ValueError(
                f"plan ratio n2/n1={self.ratio:.6g} deviates from {target:.6g} by more than {gap}"
            )

    def exact_ratio(self) -> Fraction:
        return Fraction(self.n2, self.n1)


# ---------------------------------------------------------------------------
# Draws shared across a power sweep


@dataclass
class Draws:
    """Unit-power symbols and noise per trial; scaled per power level.

    Symbols ``(T, n_streams, S)`` come from substream ``(trial, SYMBOLS,
    phase)`` and thermal noise ``(T, K, S)`` from ``(trial, NOISE, phase)``.
    """

    batch: TrialBatch
    symbols: dict[int, np.ndarray]
    noise: dict[int, np.ndarray]

    @classmethod
    def draw(cls, seed: int, trials: int, K: int, streams: dict[int, int], S: int) -> "Draws":
        batch = TrialBatch.draw(seed, trials, K)
        sym = {ph: np.empty((trials, n, S), complex) for ph, n in streams.items()}
        noise = {ph: np.empty((trials, K, S), complex) for ph in streams}
        for n_t, t in enumerate(batch.trials):
            for ph, n in streams.items():
                sym[ph][n_t] = rngmod.crandn(rngmod.substream(seed, t, rngmod.SYMBOLS, ph), (n, S))
                noise[ph][n_t] = rngmod.crandn(rngmod.substream(seed, t, rngmod.NOISE, ph), (K, S))
        return cls(batch, sym, noise)


# ---------------------------------------------------------------------------
# Signal-level helpers


def herm(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def block_power(x: np.ndarray) -> np.ndarray:
    """Mean power over the symbol-time axis."""
    return np.mean(np.abs(x) ** 2, axis=-1)


def safe_log10(x: np.ndarray) -> np.ndarray:
    return np.log10(np.maximum(x, 1e-300))


def quantize_terms(terms: np.ndarray, bits: int, expected_power: np.ndarray, clip_sigmas: float):
    """Quantize ``(T, n_terms, S)`` samples; each term has its own power."""
    ep = np.maximum(expected_power, 1e-300)[..., None]
    return quantize_array(terms, bits, ep, clip_sigmas)


def virtual_vector_rate(G: np.ndarray, noise: np.ndarray, p: float) -> np.ndarray:
    """``log2 det(I + p G^H N^{-1} G)`` with diagonal per-row noise ``N``.

    Evaluated as ``2 sum log|diag R|`` for the QR factorization of
    ``[sqrt(p/N) G; I]``, which stays accurate when the rows differ in scale
    by many orders of magnitude.
    """
    m = G.shape[-1]
    N = np.maximum(noise, 1e-300)
    A = np.sqrt(p / N)[..., :, None] * G
    eye = np.broadcast_to(np.eye(m, dtype=A.dtype), A.shape[:-2] + (m, m))
    R = np.linalg.qr(np.concatenate([A, eye], axis=-2), mode="r")
    return 2.0 * np.sum(np.log(np.abs(np.diagonal(R, axis1=-2, axis2=-1))), axis=-1) / LN2


def common_rate_per_trial(H: np.ndarray, rest: np.ndarray, p0: float) -> tuple[np.ndarray, np.ndarray]:
    """Common-symbol rate each trial supports at every user; returns (min rate, SINR).

    ``rest`` is the received signal without the common term; its power is
    the interference plus noise seen by the common symbol.
    """
    if p0 <= 0:
        T, K = rest.shape[:2]
        return np.zeros(T), np.zeros((T, K))
    ipn = block_power(rest)
    sinr = np.abs(H[..., :, 0]) ** 2 * p0 / np.maximum(ipn, 1e-300)
    return np.log2(1.0 + sinr).min(axis=-1), sinr


def term_log_powers(terms: dict[str, np.ndarray]) -> dict[str, float]:
    return {k: float(np.mean(safe_log10(block_power(v)))) for k, v in terms.items()}


def assemble_received(terms: dict[str, np.ndarray], noise: np.ndarray) -> np.ndarray:
    y = np.zeros_like(noise)
    for v in terms.values():
        y = y + v
    return y + noise


def without(terms: dict[str, np.ndarray], noise: np.ndarray, *drop: str) -> np.ndarray:
    """Received signal with the ``drop`` terms cancelled.

    Summing the remaining terms, rather than subtracting from the received
    samples, keeps the result exact when the common layer is many orders of
    magnitude above the noise.
    """
    return assemble_received({k: v for k, v in terms.items() if k not in drop}, noise)


def stderr(x: np.ndarray) -> float:
    x = np.asarray(x, float)
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
