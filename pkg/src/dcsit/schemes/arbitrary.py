"""Two-phase scheme for three users with arbitrary CSIT.

Phase 1 is the weak-CSIT channel use driven by TX 0's accuracy ``a1``.
When ``a1 > 1/4`` its side information overflows the common symbol, so
phase 2 follows: AP-ZF with TX 0 and TX 1 active (TX 2 passive) sends one
private symbol per user at power ``P**a2 / 3``; leakage stays at the noise
floor, and the common symbol of every phase-2 use carries the leftover
phase-1 side information.  Rates are accounted per phase-1 use with
``n2/n1`` phase-2 uses, fractional by default.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..analysis import as_fraction, dof_achievable_k3, phase2_ratio
from ..precoding import ApZfPartition, apzf_lambda, composite_apzf_batch
from ._common import (
    Draws,
    PhasePlan,
    RateReport,
    SchemeConfig,
    TransmissionTrace,
    annotate,
    assemble_received,
    block_power,
    common_rate_per_trial,
    safe_log10,
    stderr,
    term_log_powers,
    without,
)
from .budget import interference_terms
from .weak import ChannelUse, simulate_weak, weak_channel_use

K3 = 3


def phase2_partitions() -> list[ApZfPartition]:
    return [ApZfPartition(K3, 2, tuple(u for u in range(K3) if u != i), (0, 1)) for i in range(K3)]


def arbitrary_draws(seed: int, trials: int, symbols: int) -> Draws:
    return Draws.draw(seed, trials, K3, {0: 1 + K3 * (K3 - 1), 1: 1 + K3}, symbols)


def phase2_channel_use(draws: Draws, alphas, P: float) -> ChannelUse:
    batch = draws.batch
    a2 = float(alphas[1])
    p = P**a2 / K3
    p0 = P - P**a2
    H = batch.H
    est = batch.estimates(alphas, P)
    parts = phase2_partitions()
    lam = apzf_lambda(parts[0], None, P)
    t = np.stack([composite_apzf_batch(est, part, None, P, lam)[..., 0] for part in parts], axis=-1)  # (T, tx, user)

    unit = draws.symbols[1]
    s0 = np.sqrt(p0) * unit[:, 0, :] if p0 > 0 else np.zeros_like(unit[:, 0, :])
    s = np.sqrt(p) * unit[:, 1:, :]
    z = draws.noise[1]
    x = np.einsum("tju,tus->tjs", t, s)
    x[:, 0, :] += s0

    G = H @ t
    A = G[:, :, :, None] * s[:, None, :, :]
    idx = np.arange(K3)
    common = H[:, :, 0, None] * s0[:, None, :]
    desired = A[:, idx, idx, :]
    terms = {"common": common, "desired": desired, "residual": A.sum(axis=2) - desired}
    y = assemble_received(terms, z)
    R0, sinr0 = common_rate_per_trial(H, without(terms, z, "common"), p0)
    ipn = block_power(without(terms, z, "common", "desired"))
    rates = np.log2(1.0 + p * np.abs(G[:, idx, idx]) ** 2 / np.maximum(ipn, 1e-300))
    trace = TransmissionTrace(x, terms, z, y)
    return ChannelUse(rates, R0, sinr0, block_power(terms["residual"]), trace, 0, 0)


def simulate_arbitrary(cfg: SchemeConfig, draws: Draws | None = None, plan: PhasePlan | None = None, plan_gap: float = 1e-3, return_trace: bool = False):
    a = cfg.alphas
    if not (a[0] >= a[1] >= a[2]):
        raise ValueError("alphas must be sorted in decreasing order")
    if as_fraction(a[0]) <= Fraction(1, 4):
        rep = simulate_weak(SchemeConfig("weak", K3, a, cfg.P, cfg.trials, cfg.seed, cfg.symbols, cfg.clip_sigmas), draws, return_trace)
        rep_ = rep[0] if return_trace else rep
        rep_.scheme = "arbitrary_k3"
        rep_.notes["delegated_to"] = "weak"
        rep_.notes["analytic_dof"] = float(dof_achievable_k3(a))
        return rep
    if plan is None:
        r_exact = phase2_ratio(a[0], a[1], exact=True)
        mode = "fractional"
    else:
        plan.validate(a, plan_gap)
        r_exact = plan.exact_ratio()
        mode = "integer"
    r = float(r_exact)
    if draws is None:
        draws = arbitrary_draws(cfg.seed, cfg.trials, cfg.symbols)

    ph1 = weak_channel_use(draws, a, cfg.P, cfg.clip_sigmas, phase=0)
    ph2 = phase2_channel_use(draws, a, cfg.P)

    uses = 1.0 + r
    required = ph1.n_side_terms * ph1.side_bits
    cap_trials = ph1.common_rates + r * ph2.common_rates
    cap = float(cap_trials.mean())
    fresh = max(cap - required, 0.0)
    priv = ph1.private_rates + r * ph2.private_rates
    per_user = tuple(float(v) / uses for v in priv.mean(axis=0))
    a1, a2 = as_fraction(a[0]), as_fraction(a[1])
    feasible = (1 - a1) + r_exact * (1 - a2) >= interference_terms(K3) * a1

    labels = {f"phase1_{k}": v for k, v in term_log_powers(ph1.trace.terms).items()}
    labels.update({f"phase2_{k}": v for k, v in term_log_powers(ph2.trace.terms).items()})
    annotation = annotate(ph1.trace.terms, float(a[0]), "phase1_")
    annotation.update(annotate(ph2.trace.terms, float(a[1]), "phase2_"))
    rep = RateReport(
        scheme="arbitrary_k3",
        P=cfg.P,
        trials=cfg.trials,
        per_user_private_rate=per_user,
        common_rate=cap / uses,
        side_info_bits_required=float(required),
        fresh_common_bits=fresh,
        sum_rate=(float(priv.sum(axis=1).mean()) + fresh) / uses,
        channel_uses=uses,
        feasible=bool(feasible),
        side_info_fits=cap >= required,
        sum_rate_stderr=stderr((priv.sum(axis=1) + cap_trials - required) / uses),
        private_exponent=float(a[0]),
        term_log10_power=labels,
        term_exponent=annotation,
        common_sinr_log10=float(np.mean(safe_log10(ph1.common_sinr))),
        residual_log10_power=float(np.mean(safe_log10(ph1.residual_power))),
        notes={
            "plan_mode": mode,
            "phase2_ratio": r,
            "phase2_common_sinr_log10": float(np.mean(safe_log10(ph2.common_sinr))),
            "phase2_residual_log10_power": float(np.mean(safe_log10(ph2.residual_power))),
            "analytic_dof": float(dof_achievable_k3(a)),
        },
    )
    if return_trace:
        return rep, (ph1.trace, ph2.trace)
    return rep


def run_arbitrary_k3(alphas, P: float, seed: int = 0, trials: int = 1000, plan: PhasePlan | None = None, symbols: int = 32, clip_sigmas: float = 4.0, plan_gap: float = 1e-3) -> RateReport:
    return simulate_arbitrary(SchemeConfig("arbitrary_k3", K3, tuple(alphas), P, trials, seed, symbols, clip_sigmas), plan=plan, plan_gap=plan_gap)
