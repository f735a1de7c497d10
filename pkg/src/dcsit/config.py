"""Experiment configuration: a flat JSON object with list-valued grids.

Every output echoes the validated config; parsing the echo reproduces the run.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from .analysis import as_fraction, is_weak_regime

SCHEMES = ("toy", "weak", "arbitrary_k3", "baseline_zf")
FORMATS = ("csv", "json")
DEFAULT_P_GRID = tuple(10.0**e for e in range(2, 9))
# where and how fast a run happens, never what it computes
RUN_ONLY = ("out", "workers")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "weak"
    K: int = 3
    alphas: tuple[float, ...] = (0.2, 0.0, 0.0)
    P_grid: tuple[float, ...] = DEFAULT_P_GRID
    trials: int = 1000
    seed: int = 0
    out: str | None = None
    format: str = "json"
    # (P_min, P_max) of the slope fit; None means the top two decades
    slope_window: tuple[float, float] | None = None
    tolerance: float = 0.1
    # posterior-check: tolerance of the peak-density exponent
    peak_tolerance: float = 0.02
    symbols: int = 32
    clip_sigmas: float = 4.0
    # arbitrary_k3: None for fractional phase accounting, else phase-1 repetitions
    phase_plan_n1: int | None = None
    plan_gap: float = 1e-3
    # leakage-scaling
    n_active: int = 1
    perfect_csit: bool = False
    # dof-table and figure
    alpha_rows: tuple[tuple[float, ...], ...] | None = None
    alpha_step: float = 0.05
    alpha2_values: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)
    alpha3: float = 0.0
    workers: int = 1

    def to_dict(self, echo: bool = False) -> dict:
        """Plain-JSON view; ``echo=True`` leaves out the keys that cannot change results."""
        d = asdict(self)
        if echo:
            for k in RUN_ONLY:
                d.pop(k)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = [list(x) if isinstance(x, tuple) else x for x in v]
        return d

    def to_json(self, echo: bool = False) -> str:
        return json.dumps(self.to_dict(echo), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kw = dict(d)
        try:
            for k in ("alphas", "P_grid", "alpha2_values"):
                if k in kw:
                    kw[k] = tuple(float(x) for x in kw[k])
            if kw.get("slope_window") is not None:
                kw["slope_window"] = tuple(float(x) for x in kw["slope_window"])
            if kw.get("alpha_rows") is not None:
                kw["alpha_rows"] = tuple(tuple(float(x) for x in row) for row in kw["alpha_rows"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad numeric list in config: {exc}") from None
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(text)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def window(self) -> tuple[float, float]:
        if self.slope_window is not None:
            return self.slope_window
        hi = max(self.P_grid)
        return hi / 100.0, hi


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate(cfg: ExperimentConfig, command: str) -> ExperimentConfig:
    """Check the config against the preconditions of ``command``; returns it unchanged."""
    _require(_is_int(cfg.K) and cfg.K >= 2, "K must be an integer >= 2")
    _require(_is_int(cfg.trials) and cfg.trials >= 1, "trials must be a positive integer")
    _require(_is_int(cfg.seed) and cfg.seed >= 0, "seed must be a nonnegative integer")
    _require(_is_int(cfg.workers) and cfg.workers >= 1, "workers must be a positive integer")
    _require(cfg.format in FORMATS, f"format must be one of {FORMATS}")
    _require(cfg.tolerance >= 0 and cfg.peak_tolerance >= 0, "tolerances must be nonnegative")
    _require(len(cfg.alphas) == cfg.K, f"alphas must have K={cfg.K} entries")
    _require(all(0.0 <= a <= 1.0 for a in cfg.alphas), "alphas must lie in [0, 1]")
    _require(len(cfg.P_grid) >= 1 and all(p > 0 for p in cfg.P_grid), "P_grid must hold positive powers")
    _require(list(cfg.P_grid) == sorted(set(cfg.P_grid)), "P_grid must be strictly increasing")
    if cfg.slope_window is not None:
        lo, hi = cfg.slope_window
        _require(0 < lo < hi, "slope_window must be (P_min, P_max) with 0 < P_min < P_max")

    if command == "simulate":
        _require(cfg.scheme in SCHEMES, f"scheme must be one of {SCHEMES}")
        _require(_is_int(cfg.symbols) and cfg.symbols >= 1, "symbols must be a positive integer")
        _require(cfg.clip_sigmas > 0, "clip_sigmas must be positive")
        lo, hi = cfg.window()
        _require(sum(lo <= p <= hi for p in cfg.P_grid) >= 3, "slope window must contain at least 3 grid points")
        if cfg.scheme in ("toy", "arbitrary_k3"):
            _require(cfg.K == 3, f"scheme {cfg.scheme} requires K=3")
        if cfg.scheme == "weak":
            _require(
                is_weak_regime(cfg.alphas, cfg.K),
                f"weak scheme infeasible: weak-regime predicate max(alphas) <= 1/(1+K(K-2)) = "
                f"{Fraction(1, 1 + cfg.K * (cfg.K - 2))} violated by max(alphas) = {max(cfg.alphas)}",
            )
        if cfg.scheme == "toy":
            _require(
                as_fraction(max(cfg.alphas)) <= Fraction(1, 7),
                f"toy scheme infeasible: predicate alpha1 <= 1/7 violated by alpha1 = {max(cfg.alphas)}",
            )
        if cfg.scheme == "arbitrary_k3":
            a = cfg.alphas
            _require(a[0] >= a[1] >= a[2], "arbitrary_k3 requires alphas sorted in decreasing order")
            if cfg.phase_plan_n1 is not None:
                _require(_is_int(cfg.phase_plan_n1) and cfg.phase_plan_n1 >= 1, "phase_plan_n1 must be a positive integer")
                _require(cfg.plan_gap > 0, "plan_gap must be positive")
                if as_fraction(a[0]) > Fraction(1, 4):
                    from .schemes import PhasePlan

                    try:
                        PhasePlan.for_alphas(a, cfg.phase_plan_n1).validate(a, cfg.plan_gap)
                    except ValueError as exc:
                        raise ConfigError(f"phase plan rejected: {exc}") from None
    elif command == "leakage-scaling":
        _require(_is_int(cfg.n_active) and 0 < cfg.n_active < cfg.K, "n_active must satisfy 0 < n_active < K")
        _require(len(cfg.P_grid) >= 3, "leakage fit needs at least 3 grid points")
    elif command == "posterior-check":
        pass
    elif command in ("dof-table", "figure"):
        _require(cfg.alpha_step > 0, "alpha_step must be positive")
        if cfg.alpha_rows is not None:
            _require(all(len(r) == cfg.K for r in cfg.alpha_rows), f"every alpha row needs K={cfg.K} entries")
            _require(all(0.0 <= x <= 1.0 for r in cfg.alpha_rows for x in r), "alpha rows must lie in [0, 1]")
        if command == "figure":
            _require(cfg.K == 3, "figure curves are defined for K=3")
            _require(all(0.0 <= a <= 1.0 for a in cfg.alpha2_values), "alpha2_values must lie in [0, 1]")
            _require(all(cfg.alpha3 <= a for a in cfg.alpha2_values), "alpha3 must not exceed any alpha2 value")
    else:
        raise ConfigError(f"unknown command {command!r}")
    return cfg
