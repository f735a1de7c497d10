"""Command-line front end.

    dcsit simulate --config weak.json --format csv --out weak.csv

Exit codes: 0 when every check passes, 1 when any check misses its
tolerance, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .config import FORMATS, ConfigError, ExperimentConfig, validate
from .experiments import RUNNERS

COMMANDS = tuple(RUNNERS)


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _clean(obj):
    # strict JSON has no NaN or infinity
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(man: dict) -> str:
    return json.dumps(_clean(man), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _check_cols(c: dict | None) -> list:
    if c is None:
        return [None] * 4
    return [c["empirical"], c["analytic_target"], c["tolerance"], c["pass"]]


CHECK_HEADER = ["empirical", "analytic_target", "tolerance", "pass"]


def csv_table(man: dict) -> tuple[list[str], list[list]]:
    cmd = man["command"]
    cfg = man["config"]
    if cmd == "simulate":
        K = cfg["K"]
        head = ["P", "trial_count", "sum_rate_mean", "sum_rate_stderr"]
        head += [f"rate_user{i}" for i in range(K)] + ["side_info_required", "feasible"] + CHECK_HEADER
        slope = man["checks"][0]
        rows = [
            [p["P"], p["trials"], p["sum_rate"], p["sum_rate_stderr"], *p["per_user_private_rate"],
             p["side_info_bits_required"], p["feasible"], *_check_cols(slope)]
            for p in man["points"]
        ]
        return head, rows
    if cmd == "leakage-scaling":
        head = ["P", "trial_count", "mean_leakage", "median_leakage", "log10_mean_leakage"] + CHECK_HEADER
        c = man["checks"][0]
        rows = [[p["P"], p["trials"], p["mean_leakage"], p["median_leakage"], p["log10_mean_leakage"], *_check_cols(c)] for p in man["points"]]
        return head, rows
    if cmd == "posterior-check":
        head = ["P", "trial_count", "closed_form_variance", "sample_variance"] + CHECK_HEADER
        rows = [[p["P"], p["trials"], p["closed_form_variance"], p["sample_variance"], *_check_cols(c)]
                for p, c in zip(man["points"], man["checks"])]
        return head, rows
    if cmd == "dof-table":
        K = cfg["K"]
        head = ["K"] + [f"alpha{j}" for j in range(K)]
        head += ["centralized_bound", "weak", "achievable_k3", "baseline_zf", "lower"] + CHECK_HEADER
        rows = []
        for r in man["rows"]:
            c = r["check"]
            rows.append([r["K"], *r["alphas"], r["centralized_bound"], r["weak"], r["achievable_k3"], r["baseline_zf"],
                         None if c is None else c["lower"], *_check_cols(c)])
        return head, rows
    if cmd == "figure":
        head = ["curve", "alpha1", "dof", "alpha2", "alpha3", "K"]
        rows = []
        for c in man["curves"]:
            fp = c["fixed_params"]
            for a1, d in c["points"]:
                rows.append([c["label"], a1, d, fp.get("alpha2"), fp.get("alpha3"), fp.get("K")])
        return head, rows
    raise ValueError(f"no CSV layout for {cmd!r}")


def to_csv(man: dict, cfg: ExperimentConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# config={cfg.to_json(echo=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    head, rows = csv_table(man)
    w.writerow(head)
    for r in rows:
        w.writerow([_num(x) for x in r])
    return buf.getvalue()


def render(man: dict, cfg: ExperimentConfig) -> str:
    return to_csv(man, cfg) if cfg.format == "csv" else to_json(man)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dcsit", description="Distributed-CSIT network MIMO experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment config (defaults apply to missing keys)")
        p.add_argument("--seed", type=int, help="master seed, overrides the config")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=FORMATS, help="output format, overrides the config")
        p.add_argument("--workers", type=int, help="parallel worker processes (results do not depend on it)")
    return ap


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    cfg = cfg.with_overrides(seed=args.seed, out=args.out, format=args.format, workers=args.workers)
    return validate(cfg, args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    man = RUNNERS[args.command](cfg)
    text = render(man, cfg)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    for c in man["checks"]:
        if not c["pass"]:
            print(f"FAIL {c['check']}: empirical={c['empirical']:.6g} target={c['analytic_target']:.6g} "
                  f"tolerance={c['tolerance']:g} ({c['relation']})", file=sys.stderr)
    return 0 if man["all_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
