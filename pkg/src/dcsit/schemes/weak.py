"""Weak-CSIT scheme: single-active-TX AP-ZF plus interference retransmission.

One channel use carries ``K(K-1)`` private symbols (``K-1`` per user) and a
common symbol from TX 0.  User ``i``'s streams are AP-ZF precoded with TX 0
as the only active TX, nulling user ``i+1``.  TX 0 estimates the remaining
``K(K-2)`` cross-interference terms from its own CSIT, quantizes each with
``alpha_max * log2 P`` bits and ships them inside the common symbol.  Each
user decodes the common symbol, subtracts the quantized interference, and
decodes its private streams from a virtual vector made of its own
observation and the quantized copies of its streams seen at the other
(non-nulled) users.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..analysis import dof_centralized_bound, is_weak_regime
from ..precoding import ApZfPartition, apzf_lambda, composite_apzf_batch
from ..quantization import bits_for_budget
from ._common import (
    Draws,
    RateReport,
    SchemeConfig,
    TransmissionTrace,
    annotate,
    assemble_received,
    block_power,
    common_rate_per_trial,
    quantize_terms,
    safe_log10,
    stderr,
    term_log_powers,
    virtual_vector_rate,
    without,
)
from .budget import side_info_budget


def best_tx_first(alphas) -> tuple[tuple[float, ...], tuple[int, ...]]:
    """Relabel TXs so that TX 0 holds the best CSIT (i.i.d. channels make this free)."""
    a = list(alphas)
    j = int(np.argmax(a))
    order = (j,) + tuple(k for k in range(len(a)) if k != j)
    return tuple(a[k] for k in order), order


@dataclass
class ChannelUse:
    """Per-trial outcome of one channel use of a superposition scheme."""

    private_rates: np.ndarray  # (T, K)
    common_rates: np.ndarray  # (T,)
    common_sinr: np.ndarray  # (T, K)
    residual_power: np.ndarray  # (T, K)
    trace: TransmissionTrace
    side_bits: int
    n_side_terms: int


def weak_partitions(K: int) -> list[ApZfPartition]:
    return [ApZfPartition(K, 1, ((i + 1) % K,), (0,)) for i in range(K)]


def weak_channel_use(draws: Draws, alphas, P: float, clip_sigmas: float = 4.0, phase: int = 0) -> ChannelUse:
    batch = draws.batch
    K = batch.K
    a1 = float(alphas[0])
    p = P**a1 / (K * (K - 1))
    p0 = P - P**a1
    H = batch.H
    est = batch.estimates(alphas, P)
    Hhat0 = est[:, 0]

    parts = weak_partitions(K)
    lam = apzf_lambda(parts[0], None, P)
    T_all = np.stack([composite_apzf_batch(est, part, None, P, lam) for part in parts], axis=1)  # (T, K, K, K-1)

    unit = draws.symbols[phase]
    s0 = np.sqrt(p0) * unit[:, 0, :] if p0 > 0 else np.zeros_like(unit[:, 0, :])
    s = np.sqrt(p) * unit[:, 1:, :].reshape(len(batch), K, K - 1, -1)  # (T, user, stream, S)
    z = draws.noise[phase]

    U = np.einsum("tkjm,tkms->tkjs", T_all, s)  # precoded private signal of each user at each TX
    x = U.sum(axis=1)
    x[:, 0, :] += s0
    A = np.einsum("tij,tkjs->tiks", H, U)  # contribution of user k's streams at user i
    Ahat = np.einsum("tij,tkjs->tiks", Hhat0, U)  # the same as estimated by TX 0

    idx = np.arange(K)
    prev = (idx - 1) % K
    common = H[:, :, 0, None] * s0[:, None, :]
    desired = A[:, idx, idx, :]
    residual = A[:, idx, prev, :]
    strong_mask = np.ones((K, K), bool)
    strong_mask[idx, idx] = False
    strong_mask[idx, prev] = False
    terms = {"common": common, "desired": desired}
    if K > 2:
        terms["interference"] = np.einsum("tiks,ik->tis", A, strong_mask.astype(float))
    terms["residual"] = residual
    y = assemble_received(terms, z)

    # TX 0 quantizes every term it can estimate that AP-ZF does not null
    pairs = [(u, k) for u in range(K) for k in range(K) if strong_mask[u, k]]
    B = bits_for_budget(a1, P)
    if pairs:
        pu = np.array([u for u, _ in pairs])
        pk = np.array([k for _, k in pairs])
        est_terms = Ahat[:, pu, pk, :]
        row_gain = np.einsum("tuj,tujm->tum", Hhat0[:, pu, :], T_all[:, pk])  # (T, n, K-1)
        ep = p * np.sum(np.abs(row_gain) ** 2, axis=-1)
        payload, Q, _ = quantize_terms(est_terms, B, ep, clip_sigmas)
    else:
        pu = pk = np.zeros(0, int)
        est_terms = Q = np.zeros((len(batch), 0, y.shape[-1]), complex)
        payload = np.zeros(Q.shape, np.int64)
        row_gain = np.zeros((len(batch), 0, K - 1), complex)

    R0, sinr0 = common_rate_per_trial(H, without(terms, z, "common"), p0)

    # interference left after subtracting the side information, plus residual
    leak = without(terms, np.zeros_like(z), "common", "desired")
    for n, (u, _) in enumerate(pairs):
        leak[:, u, :] -= Q[:, n, :]
    n1 = block_power(leak + z)
    residual_power = block_power(leak)

    rates = np.empty((len(batch), K))
    for i in range(K):
        rows = [np.einsum("tj,tjm->tm", H[:, i, :], T_all[:, i])]
        noise = [n1[:, i]]
        for n, (u, k) in enumerate(pairs):
            if k == i:
                rows.append(row_gain[:, n])
                noise.append(block_power(Q[:, n] - est_terms[:, n]))
        G = np.stack(rows, axis=1)
        rates[:, i] = virtual_vector_rate(G, np.stack(noise, axis=1), p)

    trace = TransmissionTrace(
        transmitted=x,
        terms=terms,
        noise=z,
        received=y,
        side_info_pairs=pairs,
        side_info_payload=payload,
        side_info_reconstruction=Q,
        side_info_bits_per_term=B,
    )
    return ChannelUse(rates, R0, sinr0, residual_power, trace, B, len(pairs))


def report_single_use(cfg: SchemeConfig, use: ChannelUse, feasible: bool, private_exponent: float, notes: dict) -> RateReport:
    required = use.n_side_terms * use.side_bits
    cap = float(use.common_rates.mean())
    fresh = max(cap - required, 0.0)
    per_user = tuple(float(v) for v in use.private_rates.mean(axis=0))
    per_trial = use.private_rates.sum(axis=1) + use.common_rates - required
    return RateReport(
        scheme=cfg.scheme,
        P=cfg.P,
        trials=cfg.trials,
        per_user_private_rate=per_user,
        common_rate=cap,
        side_info_bits_required=float(required),
        fresh_common_bits=fresh,
        sum_rate=sum(per_user) + fresh,
        channel_uses=1.0,
        feasible=feasible,
        side_info_fits=cap >= required,
        sum_rate_stderr=stderr(per_trial),
        private_exponent=private_exponent,
        term_log10_power=term_log_powers(use.trace.terms),
        term_exponent=annotate(use.trace.terms, private_exponent),
        common_sinr_log10=float(np.mean(safe_log10(use.common_sinr))),
        residual_log10_power=float(np.mean(safe_log10(use.residual_power))),
        notes=notes,
    )


def weak_draws(seed: int, trials: int, K: int, symbols: int) -> Draws:
    return Draws.draw(seed, trials, K, {0: 1 + K * (K - 1)}, symbols)


def simulate_weak(cfg: SchemeConfig, draws: Draws | None = None, return_trace: bool = False):
    alphas, order = best_tx_first(cfg.alphas)
    K = cfg.K
    if draws is None:
        draws = weak_draws(cfg.seed, cfg.trials, K, cfg.symbols)
    use = weak_channel_use(draws, alphas, cfg.P, cfg.clip_sigmas)
    budget = side_info_budget(K, alphas[0], "zf")
    notes = {"tx_order": list(order), "weak_regime": is_weak_regime(alphas, K), "centralized_bound": float(dof_centralized_bound(alphas, K))}
    rep = report_single_use(cfg, use, budget.feasible, float(alphas[0]), notes)
    return (rep, use.trace) if return_trace else rep


def run_weak(K: int, alphas, P: float, seed: int = 0, trials: int = 1000, symbols: int = 32, clip_sigmas: float = 4.0) -> RateReport:
    """Weak-CSIT scheme at one power level.

    Outside the weak regime the run still happens but is flagged
    ``feasible=False``: the side information would not fit the common symbol.
    """
    return simulate_weak(SchemeConfig("weak", K, tuple(alphas), P, trials, seed, symbols, clip_sigmas))
