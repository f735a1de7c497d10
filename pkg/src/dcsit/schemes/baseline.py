"""Conventional distributed ZF with a common layer, for comparison."""

from __future__ import annotations

import numpy as np

from ..analysis import dof_baseline
from ..precoding import naive_distributed_zf_batch, zf_lambda
from ._common import (
    Draws,
    RateReport,
    SchemeConfig,
    TransmissionTrace,
    assemble_received,
    block_power,
    common_rate_per_trial,
    safe_log10,
    stderr,
    term_log_powers,
    without,
)


def baseline_draws(seed: int, trials: int, K: int, symbols: int) -> Draws:
    return Draws.draw(seed, trials, K, {0: 1 + K}, symbols)


def simulate_baseline(cfg: SchemeConfig, draws: Draws | None = None, return_trace: bool = False):
    K, P = cfg.K, cfg.P
    if draws is None:
        draws = baseline_draws(cfg.seed, cfg.trials, K, cfg.symbols)
    batch = draws.batch
    amin = min(cfg.alphas)
    p = P**amin / K
    p0 = P - P**amin
    H = batch.H
    W = naive_distributed_zf_batch(batch.estimates(cfg.alphas, P), P, zf_lambda(K, P))

    unit = draws.symbols[0]
    s0 = np.sqrt(p0) * unit[:, 0, :] if p0 > 0 else np.zeros_like(unit[:, 0, :])
    s = np.sqrt(p) * unit[:, 1:, :]  # (T, user, S)
    z = draws.noise[0]
    U = W[:, None, :, :] * np.swapaxes(s, 1, 2)[:, :, None, :]  # (T, S, tx, user)
    x = np.swapaxes(U.sum(axis=-1), 1, 2)
    x[:, 0, :] += s0

    G = H @ W  # (T, user, stream)
    A = G[:, :, :, None] * s[:, None, :, :]  # (T, i, k, S)
    idx = np.arange(K)
    common = H[:, :, 0, None] * s0[:, None, :]
    desired = A[:, idx, idx, :]
    terms = {
        "common": common,
        "desired": desired,
        "interference": A.sum(axis=2) - desired,
    }
    y = assemble_received(terms, z)
    R0, sinr0 = common_rate_per_trial(H, without(terms, z, "common"), p0)

    ipn = block_power(without(terms, z, "common", "desired"))
    sinr = p * np.abs(G[:, idx, idx]) ** 2 / np.maximum(ipn, 1e-300)
    rates = np.log2(1.0 + sinr)
    per_user = tuple(float(v) for v in rates.mean(axis=0))
    cap = float(R0.mean())
    rep = RateReport(
        scheme="baseline_zf",
        P=P,
        trials=cfg.trials,
        per_user_private_rate=per_user,
        common_rate=cap,
        side_info_bits_required=0.0,
        fresh_common_bits=cap,
        sum_rate=sum(per_user) + cap,
        channel_uses=1.0,
        feasible=True,
        side_info_fits=True,
        sum_rate_stderr=stderr(rates.sum(axis=1) + R0),
        private_exponent=float(amin),
        term_log10_power=term_log_powers(terms),
        # ZF leakage decays like P**-amin, so the interference sits at P**0
        term_exponent={"common": 1.0, "desired": float(amin), "interference": 0.0},
        common_sinr_log10=float(np.mean(safe_log10(sinr0))) if p0 > 0 else float("nan"),
        residual_log10_power=float(np.mean(safe_log10(block_power(terms["interference"])))),
        notes={"analytic_dof": float(dof_baseline(cfg.alphas, K))},
    )
    trace = TransmissionTrace(x, terms, z, y)
    return (rep, trace) if return_trace else rep


def run_baseline_zf(K: int, alphas, P: float, seed: int = 0, trials: int = 1000, symbols: int = 32) -> RateReport:
    return simulate_baseline(SchemeConfig("baseline_zf", K, tuple(alphas), P, trials, seed, symbols))
