"""Active-Passive Zero-Forcing (AP-ZF) and the conventional distributed ZF baseline.

An AP-ZF precoder serves ``K - n`` streams while nulling interference at
``n`` users.  The passive TXs apply a fixed, CSI-independent matrix
``T_P``; each active TX computes a regularized least-squares correction
from its own channel estimate so that the active contribution cancels
the interference created by the passive TXs.  In the distributed setting
every active TX only implements its own row of the correction, so the
effective precoder is a composite of rows computed from different
estimates.

Array kernels (``*_batch``) accept arbitrary leading batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import rng as rngmod
from .model import ChannelRealization, DistributedCsit


@dataclass(frozen=True)
class ApZfPartition:
    K: int
    n: int
    interfered_users: tuple[int, ...]
    active_txs: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0 < self.n < self.K:
            raise ValueError(f"need 0 < n < K, got n={self.n}, K={self.K}")
        users = tuple(int(u) for u in self.interfered_users)
        if len(users) != self.n or len(set(users)) != self.n:
            raise ValueError("interfered_users must list n distinct users")
        if any(not 0 <= u < self.K for u in users):
            raise ValueError("interfered user index out of range")
        object.__setattr__(self, "interfered_users", users)
        active = tuple(range(self.n)) if self.active_txs is None else tuple(int(j) for j in self.active_txs)
        if len(active) != self.n or len(set(active)) != self.n or any(not 0 <= j < self.K for j in active):
            raise ValueError("active_txs must list n distinct TX indices")
        object.__setattr__(self, "active_txs", active)

    @property
    def passive_txs(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.K) if j not in self.active_txs)

    @property
    def streams(self) -> int:
        return self.K - self.n


@dataclass(frozen=True)
class PassiveSeed:
    T_P: np.ndarray

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.T_P, dtype=complex))
        if T.shape[0] != T.shape[1]:
            raise ValueError("passive precoder must be square")
        s = np.linalg.svd(T, compute_uv=False)
        if s.min() <= 1e-12 * s.max():
            raise ValueError("passive precoder must be full rank")
        object.__setattr__(self, "T_P", T)

    @classmethod
    def identity(cls, size: int) -> "PassiveSeed":
        return cls(np.eye(size))

    @property
    def size(self) -> int:
        return self.T_P.shape[0]


@dataclass(frozen=True)
class Precoder:
    matrix: np.ndarray
    lam: float
    partition: ApZfPartition | None = None


def _seed_for(partition: ApZfPartition, seed: PassiveSeed | None) -> PassiveSeed:
    seed = PassiveSeed.identity(partition.streams) if seed is None else seed
    if seed.size != partition.streams:
        raise ValueError(f"passive precoder must be {partition.streams}x{partition.streams}")
    return seed


def _herm(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def active_precoder(estimate_rows, partition: ApZfPartition, seed: PassiveSeed | None, P: float) -> np.ndarray:
    """``-(Ha^H Ha + I/P)^{-1} Ha^H Hp T_P`` from one estimate.

    ``estimate_rows`` is either the ``n x K`` estimate of the interfered
    users' channels or a full ``K x K`` estimate (rows are then selected).
    """
    seed = _seed_for(partition, seed)
    est = np.asarray(estimate_rows)
    if est.shape[-2] == partition.K:
        est = est[..., list(partition.interfered_users), :]
    HA = est[..., list(partition.active_txs)]
    HP = est[..., list(partition.passive_txs)]
    HAh = _herm(HA)
    gram = HAh @ HA + np.eye(partition.n) / P
    return -np.linalg.solve(gram, HAh @ HP @ seed.T_P)


def _assemble(active_rows: np.ndarray, partition: ApZfPartition, seed: PassiveSeed) -> np.ndarray:
    shape = active_rows.shape[:-2] + (partition.K, partition.streams)
    T = np.empty(shape, complex)
    T[..., list(partition.active_txs), :] = active_rows
    T[..., list(partition.passive_txs), :] = seed.T_P
    return T


def apzf_from_estimate(estimate_rows, partition: ApZfPartition, seed: PassiveSeed | None, P: float) -> np.ndarray:
    """Unnormalized ``[T_A; T_P]`` as computed at a single TX."""
    seed = _seed_for(partition, seed)
    return _assemble(active_precoder(estimate_rows, partition, seed, P), partition, seed)


def composite_apzf_batch(estimates: np.ndarray, partition: ApZfPartition, seed: PassiveSeed | None, P: float, lam: float | None = None) -> np.ndarray:
    """Composite AP-ZF from per-TX estimates of shape ``(..., K_tx, K, K)``."""
    seed = _seed_for(partition, seed)
    if estimates.shape[-3] != partition.K or estimates.shape[-1] != partition.K:
        raise ValueError("estimates inconsistent with the partition size")
    rows = np.empty(estimates.shape[:-3] + (partition.n, partition.streams), complex)
    for r, tx in enumerate(partition.active_txs):
        TA = active_precoder(estimates[..., tx, :, :], partition, seed, P)
        rows[..., r, :] = TA[..., r, :]
    if lam is None:
        lam = apzf_lambda(partition, seed, P)
    return lam * _assemble(rows, partition, seed)


def composite_apzf(csit: DistributedCsit, partition: ApZfPartition, seed: PassiveSeed | None = None, P: float | None = None, lam: float | None = None) -> Precoder:
    P = csit.power if P is None else P
    if csit.K != partition.K:
        raise ValueError("partition inconsistent with the number of TXs")
    seed = _seed_for(partition, seed)
    if lam is None:
        lam = apzf_lambda(partition, seed, P)
    return Precoder(composite_apzf_batch(csit.estimates, partition, seed, P, lam), lam, partition)


def perfect_apzf_batch(H: np.ndarray, partition: ApZfPartition, seed: PassiveSeed | None, P: float, lam: float | None = None) -> np.ndarray:
    seed = _seed_for(partition, seed)
    if lam is None:
        lam = apzf_lambda(partition, seed, P)
    return lam * apzf_from_estimate(H, partition, seed, P)


def perfect_apzf(H: ChannelRealization, partition: ApZfPartition, seed: PassiveSeed | None = None, P: float = 1.0, lam: float | None = None) -> Precoder:
    seed = _seed_for(partition, seed)
    if lam is None:
        lam = apzf_lambda(partition, seed, P)
    return Precoder(perfect_apzf_batch(H.H, partition, seed, P, lam), lam, partition)


def leakage(H, precoder, interfered_users) -> np.ndarray | float:
    """Squared Frobenius norm of the interference at ``interfered_users``."""
    H = H.H if isinstance(H, ChannelRealization) else np.asarray(H)
    T = precoder.matrix if isinstance(precoder, Precoder) else np.asarray(precoder)
    L = H[..., list(interfered_users), :] @ T
    out = np.sum(np.abs(L) ** 2, axis=(-2, -1))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Normalization


def gaussian_sampler(rng: np.random.Generator, size: int, n: int, K: int) -> np.ndarray:
    return rngmod.crandn(rng, (size, n, K))


Sampler = Callable[[np.random.Generator, int, int, int], np.ndarray]


def normalization_lambda(
    channel_sampler: Sampler | None,
    partition: ApZfPartition,
    seed: PassiveSeed | None,
    P: float,
    num_samples: int = 10_000,
    rng_seed: int = 0,
) -> float:
    """Monte Carlo ``1/sqrt(E ||[T_A*; T_P]||_F^2)`` over the channel statistics."""
    if num_samples < 1000:
        raise ValueError("num_samples must be at least 1000")
    seed = _seed_for(partition, seed)
    sampler = gaussian_sampler if channel_sampler is None else channel_sampler
    rows = np.asarray(sampler(rngmod.substream(rng_seed, 0, rngmod.LAMBDA), num_samples, partition.n, partition.K))
    if rows.shape != (num_samples, partition.n, partition.K):
        raise ValueError(f"sampler returned shape {rows.shape}, expected {(num_samples, partition.n, partition.K)}")
    if not np.all(np.isfinite(rows)):
        raise ValueError("sampler returned non-finite channel entries")
    T = apzf_from_estimate(rows, partition, seed, P)
    m = float(np.mean(np.sum(np.abs(T) ** 2, axis=(-2, -1))))
    return 1.0 / np.sqrt(m)


def wishart_density(x: np.ndarray | float, n: int) -> np.ndarray | float:
    """One-point eigenvalue density of ``A^H A`` for ``A`` an ``n x n`` CN(0,1) matrix.

    Integrates to ``n``.
    """
    return np.exp(-x) * sum(special.eval_laguerre(k, x) ** 2 for k in range(n))


@lru_cache(maxsize=None)
def regularized_inverse_moment(n: int, P: float) -> float:
    """``E tr(A (A^H A + I/P)^{-2} A^H)`` for ``A`` an ``n x n`` CN(0,1) matrix.

    Evaluated by quadrature against the eigenvalue density, on a log scale
    because the integrand is concentrated near ``x = 1/P``.
    """
    eps = 1.0 / P

    def f(u):
        x = np.exp(u)
        return x * x / (x + eps) ** 2 * wishart_density(x, n)

    lo, hi = np.log(eps) - 40.0, np.log(60.0 + 10 * n)
    pts = sorted({np.log(eps), 0.0})
    val, _ = integrate.quad(f, lo, hi, points=pts, limit=400, epsabs=0, epsrel=1e-10)
    return float(val)


def lambda_quadrature(partition: ApZfPartition, seed: PassiveSeed | None, P: float) -> float:
    """Exact AP-ZF normalization for i.i.d. CN(0,1) channels."""
    seed = _seed_for(partition, seed)
    tp = float(np.sum(np.abs(seed.T_P) ** 2))
    return 1.0 / np.sqrt(tp * (1.0 + regularized_inverse_moment(partition.n, float(P))))


@lru_cache(maxsize=256)
def _cached_mc_lambda(partition: ApZfPartition, tp_bytes: bytes, tp_shape, P: float, num_samples: int, rng_seed: int) -> float:
    T_P = np.frombuffer(tp_bytes, dtype=complex).reshape(tp_shape)
    return normalization_lambda(None, partition, PassiveSeed(T_P), P, num_samples, rng_seed)


def apzf_lambda(partition: ApZfPartition, seed: PassiveSeed | None, P: float, method: str = "quadrature", num_samples: int = 100_000, rng_seed: int = 0) -> float:
    """Normalization used by the precoders and schemes (cached)."""
    seed = _seed_for(partition, seed)
    if method == "quadrature":
        return lambda_quadrature(partition, seed, P)
    if method == "monte_carlo":
        return _cached_mc_lambda(partition, seed.T_P.tobytes(), seed.T_P.shape, float(P), num_samples, rng_seed)
    raise ValueError(f"unknown normalization method {method!r}")


# ---------------------------------------------------------------------------
# Conventional distributed ZF


def zf_lambda(K: int, P: float) -> float:
    """Normalization of the perfect-CSIT regularized ZF precoder (i.i.d. CN(0,1))."""
    return 1.0 / np.sqrt(regularized_inverse_moment(K, float(P)))


def regularized_zf(Hhat: np.ndarray, P: float) -> np.ndarray:
    """``(Hhat^H Hhat + I/P)^{-1} Hhat^H``; column ``k`` serves user ``k``."""
    K = Hhat.shape[-1]
    Hh = _herm(Hhat)
    return np.linalg.solve(Hh @ Hhat + np.eye(K) / P, Hh)


def naive_distributed_zf_batch(estimates: np.ndarray, P: float, lam: float | None = None) -> np.ndarray:
    """Each TX keeps its own row of the ZF precoder computed from its own estimate."""
    K = estimates.shape[-1]
    W = np.empty(estimates.shape[:-3] + (K, K), complex)
    for j in range(K):
        W[..., j, :] = regularized_zf(estimates[..., j, :, :], P)[..., j, :]
    if lam is None:
        lam = zf_lambda(K, P)
    return lam * W


def naive_distributed_zf(csit: DistributedCsit, P: float | None = None) -> Precoder:
    P = csit.power if P is None else P
    lam = zf_lambda(csit.K, P)
    return Precoder(naive_distributed_zf_batch(csit.estimates, P, lam), lam, None)


def zf_user_leakage(H: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Per-user interference power ``sum_{k != i} |h_i^H w_k|^2``."""
    G = np.abs(H @ W) ** 2
    return G.sum(axis=-1) - np.diagonal(G, axis1=-2, axis2=-1)
