"""Channel and distributed-CSIT generative model.

Channel entries and estimation noise are i.i.d. CN(0, 1).  TX ``j`` sees

    Hhat[j] = H + P**(-alpha[j]/2) * Delta[j]

with the ``Delta[j]`` independent across TXs.  Under this model the
posterior of the vectorized channel given all estimates is Gaussian with
a scalar covariance, which the functions at the bottom of this module
compute both by brute-force conditioning and in closed form.

Indices are 0-based throughout: the first TX is TX 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .analysis import ScalingFit, fit_exponent


@dataclass(frozen=True)
class CsitScalingVector:
    alphas: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in self.alphas)
        if not a:
            raise ValueError("empty CSIT scaling vector")
        if any(not (0.0 <= x <= 1.0) for x in a):
            raise ValueError(f"CSIT scaling coefficients must lie in [0, 1], got {a}")
        object.__setattr__(self, "alphas", a)

    @property
    def alpha_max(self) -> float:
        return max(self.alphas)

    @property
    def K(self) -> int:
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    def __len__(self):
        return len(self.alphas)

    def __getitem__(self, j):
        return self.alphas[j]


def as_scaling(alphas) -> CsitScalingVector:
    return alphas if isinstance(alphas, CsitScalingVector) else CsitScalingVector(tuple(alphas))


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray

    @property
    def K(self) -> int:
        return self.H.shape[0]

    def row(self, i: int) -> np.ndarray:
        """``h_i^H``, the channel from all TXs to user ``i``."""
        return self.H[i]


@dataclass(frozen=True)
class DistributedCsit:
    estimates: np.ndarray  # (K, K, K): estimates[j] is TX j's view of H
    scaling: CsitScalingVector
    power: float
    noise_draws: np.ndarray  # (K, K, K): the Delta[j]

    @property
    def K(self) -> int:
        return self.estimates.shape[-1]


@dataclass(frozen=True)
class PosteriorSummary:
    mean: np.ndarray
    per_entry_variance: float


def draw_channel(rng: np.random.Generator, K: int) -> ChannelRealization:
    if K < 2:
        raise ValueError("K must be at least 2")
    return ChannelRealization(rngmod.crandn(rng, (K, K)))


def draw_estimates(rng, H: ChannelRealization, alphas, P: float) -> DistributedCsit:
    """Draw one estimate per TX.

    ``rng`` is a single generator (noise drawn for TX 0, 1, ... in order) or
    a sequence of per-TX generators.
    """
    if not P > 0:
        raise ValueError("P must be positive")
    scaling = as_scaling(alphas)
    K = H.K
    if scaling.K != K:
        raise ValueError(f"need {K} CSIT coefficients, got {scaling.K}")
    gens = rng if isinstance(rng, Sequence) else [rng] * K
    delta = np.stack([rngmod.crandn(g, (K, K)) for g in gens])
    return DistributedCsit(estimates_from_noise(H.H, delta, scaling, P), scaling, float(P), delta)


def estimates_from_noise(H: np.ndarray, delta: np.ndarray, alphas, P: float) -> np.ndarray:
    """``H + P**(-alpha_j/2) Delta_j``; works on trial batches ``(..., K, K)``."""
    a = np.asarray(list(alphas), dtype=float)
    scale = P ** (-a / 2.0)
    return H[..., None, :, :] + scale[:, None, None] * delta


@dataclass
class TrialBatch:
    """Channels and CSIT noise for a block of trials, one substream per trial/TX.

    The noise is kept unscaled so the same draws can be reused at every
    power level of a sweep.
    """

    seed: int
    trials: np.ndarray
    H: np.ndarray  # (T, K, K)
    delta: np.ndarray  # (T, K, K, K)
    extra: dict = field(default_factory=dict)

    @classmethod
    def draw(cls, seed: int, n_trials: int, K: int, start: int = 0) -> "TrialBatch":
        if K < 2:
            raise ValueError("K must be at least 2")
        idx = np.arange(start, start + n_trials)
        H = np.empty((n_trials, K, K), complex)
        delta = np.empty((n_trials, K, K, K), complex)
        for n, t in enumerate(idx):
            H[n] = draw_channel(rngmod.substream(seed, t, rngmod.CHANNEL), K).H
            for j in range(K):
                delta[n, j] = rngmod.crandn(rngmod.substream(seed, t, rngmod.CSIT, j), (K, K))
        return cls(seed, idx, H, delta)

    @property
    def K(self) -> int:
        return self.H.shape[-1]

    def __len__(self):
        return self.H.shape[0]

    def estimates(self, alphas, P: float) -> np.ndarray:
        return estimates_from_noise(self.H, self.delta, alphas, P)


# ---------------------------------------------------------------------------
# Gaussian posterior of the channel given all estimates


def posterior_closed_form(alphas, P: float) -> float:
    """Per-entry posterior variance ``1/(1 + sum_j P**alpha_j)``."""
    if not P > 0:
        raise ValueError("P must be positive")
    a = np.asarray(list(alphas), dtype=float)
    return float(1.0 / (1.0 + np.sum(P**a)))


def _stacking(K: int, n_tx: int) -> np.ndarray:
    # the (n_tx K^2) x K^2 block column [I; I; ...; I]
    return np.tile(np.eye(K * K), (n_tx, 1))


def _noise_cov(alphas, P: float, K: int) -> np.ndarray:
    a = np.asarray(list(alphas), dtype=float)
    return np.diag(np.repeat(P ** (-a), K * K))


def posterior_gain(alphas, P: float, K: int) -> np.ndarray:
    """``E[h y^H] K_yy^{-1}`` for ``y`` the stacked vectorized estimates."""
    n_tx = len(list(alphas))
    Ibar = _stacking(K, n_tx)
    Kyy = Ibar @ Ibar.T + _noise_cov(alphas, P, K)
    # Kyy is symmetric, so (Kyy^{-1} Ibar)^T = Ibar^T Kyy^{-1}
    return np.linalg.solve(Kyy, Ibar).T


def posterior_covariance(alphas, P: float, K: int) -> np.ndarray:
    """Full ``K^2 x K^2`` conditional covariance by direct conditioning."""
    n_tx = len(list(alphas))
    Ibar = _stacking(K, n_tx)
    return np.eye(K * K) - posterior_gain(alphas, P, K) @ Ibar


def stack_estimates(estimates: np.ndarray) -> np.ndarray:
    """Row-major vectorization of each TX's estimate, stacked over TXs."""
    shape = estimates.shape
    return estimates.reshape(*shape[:-3], shape[-3] * shape[-2] * shape[-1])


def posterior_mean(csit: DistributedCsit) -> np.ndarray:
    W = posterior_gain(csit.scaling, csit.power, csit.K)
    return W @ stack_estimates(csit.estimates)


def posterior_mean_simplified(csit: DistributedCsit) -> np.ndarray:
    w = csit.power ** np.asarray(csit.scaling.alphas)
    num = np.tensordot(w, csit.estimates, axes=(0, 0))
    return (num / (1.0 + w.sum())).reshape(-1)


def posterior_summary(csit: DistributedCsit) -> PosteriorSummary:
    return PosteriorSummary(posterior_mean(csit), posterior_closed_form(csit.scaling, csit.power))


def posterior_residual_covariance(seed: int, n_trials: int, alphas, P: float, batch: TrialBatch | None = None) -> np.ndarray:
    """Sample covariance of ``h - E[h | estimates]`` over independent trials.

    A pre-drawn ``batch`` (e.g. shared across a power sweep) overrides
    ``seed`` and ``n_trials``.
    """
    scaling = as_scaling(alphas)
    if batch is None:
        batch = TrialBatch.draw(seed, n_trials, scaling.K)
    n_trials = len(batch)
    W = posterior_gain(scaling, P, scaling.K)
    y = stack_estimates(batch.estimates(scaling, P))
    resid = batch.H.reshape(n_trials, -1) - y @ W.T
    return resid.T @ resid.conj() / n_trials


def relative_frobenius_error(C: np.ndarray, variance: float) -> float:
    target = variance * np.eye(C.shape[0])
    return float(np.linalg.norm(C - target) / np.linalg.norm(target))


def peak_density(variance: float) -> float:
    """Peak of the density of one real dimension of a CN(0, variance) entry."""
    return 1.0 / np.sqrt(np.pi * variance)


def _check_grid(P_grid) -> np.ndarray:
    P = np.asarray(P_grid, dtype=float)
    if P.size < 4 or np.any(P <= 0):
        raise ValueError("need at least 4 positive grid points")
    if np.log10(P.max() / P.min()) < 3 - 1e-9:
        raise ValueError("grid must span at least 3 decades")
    return P


def peak_density_exponent(alphas, P_grid) -> ScalingFit:
    """Fitted exponent of the per-dimension posterior peak density vs ``P``."""
    P = _check_grid(P_grid)
    return fit_exponent([(p, peak_density(posterior_closed_form(alphas, p))) for p in P])


def empirical_peak_density_exponent(seed: int, n_trials: int, alphas, P_grid) -> ScalingFit:
    """Same fit with the variance measured from Monte Carlo posterior residuals."""
    P = _check_grid(P_grid)
    batch = TrialBatch.draw(seed, n_trials, as_scaling(alphas).K)
    pts = []
    for p in P:
        C = posterior_residual_covariance(seed, n_trials, alphas, p, batch)
        pts.append((p, peak_density(float(np.real(np.trace(C))) / C.shape[0])))
    return fit_exponent(pts)
