"""Three-user toy scheme: no precoding, every cross term is retransmitted.

Each user receives three private symbols sent straight from the three TXs
(vector power ``P**a1 / 3``) under a common symbol from TX 0.  TX 0
quantizes all six cross-interference terms and sends them in the common
symbol, which only fits when ``a1 <= 1/7``.
"""

from __future__ import annotations

import numpy as np

from ..analysis import dof_centralized_bound
from ..quantization import bits_for_budget
from ._common import (
    Draws,
    SchemeConfig,
    TransmissionTrace,
    assemble_received,
    block_power,
    common_rate_per_trial,
    quantize_terms,
    virtual_vector_rate,
    without,
)
from .budget import side_info_budget
from .weak import ChannelUse, best_tx_first, report_single_use

K_TOY = 3


def toy_draws(seed: int, trials: int, symbols: int) -> Draws:
    return Draws.draw(seed, trials, K_TOY, {0: 1 + K_TOY * K_TOY}, symbols)


def toy_channel_use(draws: Draws, alphas, P: float, clip_sigmas: float = 4.0) -> ChannelUse:
    batch = draws.batch
    K = K_TOY
    a1 = float(alphas[0])
    p = P**a1 / (K * K)
    p0 = P - P**a1
    H = batch.H
    Hhat0 = batch.estimates(alphas, P)[:, 0]

    unit = draws.symbols[0]
    s0 = np.sqrt(p0) * unit[:, 0, :] if p0 > 0 else np.zeros_like(unit[:, 0, :])
    s = np.sqrt(p) * unit[:, 1:, :].reshape(len(batch), K, K, -1)  # (T, user, tx, S)
    z = draws.noise[0]
    x = s.sum(axis=1)
    x[:, 0, :] += s0

    A = np.einsum("tij,tkjs->tiks", H, s)
    Ahat = np.einsum("tij,tkjs->tiks", Hhat0, s)
    idx = np.arange(K)
    cross = ~np.eye(K, dtype=bool)
    common = H[:, :, 0, None] * s0[:, None, :]
    terms = {
        "common": common,
        "desired": A[:, idx, idx, :],
        "interference": np.einsum("tiks,ik->tis", A, cross.astype(float)),
    }
    y = assemble_received(terms, z)

    pairs = [(u, k) for u in range(K) for k in range(K) if u != k]
    pu = np.array([u for u, _ in pairs])
    pk = np.array([k for _, k in pairs])
    B = bits_for_budget(a1, P)
    est_terms = Ahat[:, pu, pk, :]
    ep = p * np.sum(np.abs(Hhat0[:, pu, :]) ** 2, axis=-1)
    payload, Q, _ = quantize_terms(est_terms, B, ep, clip_sigmas)

    R0, sinr0 = common_rate_per_trial(H, without(terms, z, "common"), p0)
    # interference left after subtracting the side information, plus residual
    leak = without(terms, np.zeros_like(z), "common", "desired")
    for n, (u, _) in enumerate(pairs):
        leak[:, u, :] -= Q[:, n, :]
    n1 = block_power(leak + z)
    residual_power = block_power(leak)

    rates = np.empty((len(batch), K))
    for i in range(K):
        rows, noise = [H[:, i, :]], [n1[:, i]]
        for n, (u, k) in enumerate(pairs):
            if k == i:
                rows.append(Hhat0[:, u, :])
                noise.append(block_power(Q[:, n] - est_terms[:, n]))
        rates[:, i] = virtual_vector_rate(np.stack(rows, axis=1), np.stack(noise, axis=1), p)

    trace = TransmissionTrace(x, terms, z, y, pairs, payload, Q, B)
    return ChannelUse(rates, R0, sinr0, residual_power, trace, B, len(pairs))


def simulate_toy(cfg: SchemeConfig, draws: Draws | None = None, return_trace: bool = False):
    alphas, order = best_tx_first(cfg.alphas)
    if draws is None:
        draws = toy_draws(cfg.seed, cfg.trials, cfg.symbols)
    use = toy_channel_use(draws, alphas, cfg.P, cfg.clip_sigmas)
    budget = side_info_budget(K_TOY, alphas[0], "toy")
    notes = {"tx_order": list(order), "centralized_bound": float(dof_centralized_bound(alphas))}
    rep = report_single_use(cfg, use, budget.feasible, float(alphas[0]), notes)
    return (rep, use.trace) if return_trace else rep


def run_toy(alphas, P: float, seed: int = 0, trials: int = 1000, symbols: int = 32, clip_sigmas: float = 4.0):
    """Toy scheme at one power level; ``feasible`` is ``a1 <= 1/7``."""
    return simulate_toy(SchemeConfig("toy", K_TOY, tuple(alphas), P, trials, seed, symbols, clip_sigmas))
