import csv
import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcsit import cli
from dcsit.config import ConfigError, ExperimentConfig, validate
from dcsit.experiments import check, run_dof_table

SMALL = {"trials": 20, "symbols": 4, "P_grid": [1e4, 1e5, 1e6, 1e7, 1e8]}


def write(tmp_path, name, d):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# config


@given(
    st.sampled_from(["weak", "toy", "arbitrary_k3", "baseline_zf"]),
    st.integers(0, 2**31),
    st.lists(st.floats(1.0, 1e30), min_size=1, max_size=6, unique=True),
    st.sampled_from(["csv", "json"]),
)
def test_config_json_round_trip(scheme, seed, grid, fmt):
    cfg = ExperimentConfig(scheme=scheme, seed=seed, P_grid=tuple(sorted(grid)), format=fmt, alpha_rows=((0.1, 0, 0),))
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_echo_leaves_out_run_only_keys():
    cfg = ExperimentConfig(out="x.json", workers=4)
    echo = json.loads(cfg.to_json(echo=True))
    assert "out" not in echo and "workers" not in echo
    assert ExperimentConfig.from_dict(echo) == ExperimentConfig()


def test_config_rejects_unknown_and_malformed():
    with pytest.raises(ConfigError, match="unknown config keys: bogus"):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"alphas": ["a", 0, 0]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict([1, 2])
    with pytest.raises(ConfigError):
        ExperimentConfig.load("/nonexistent/cfg.json")


def test_default_window_is_top_two_decades():
    assert ExperimentConfig(P_grid=(1e2, 1e5, 1e8)).window() == (1e6, 1e8)
    assert ExperimentConfig(slope_window=(1e3, 1e4)).window() == (1e3, 1e4)


@pytest.mark.parametrize(
    "kw,command,msg",
    [
        ({"alphas": (0.3, 0.0, 0.0)}, "simulate", "weak-regime predicate"),
        ({"scheme": "toy", "alphas": (0.2, 0.0, 0.0)}, "simulate", "1/7"),
        ({"scheme": "toy", "K": 4, "alphas": (0.1, 0, 0, 0)}, "simulate", "K=3"),
        ({"scheme": "arbitrary_k3", "alphas": (0.25, 0.5, 0.0)}, "simulate", "sorted"),
        ({"alphas": (0.1, 0.0)}, "simulate", "K=3 entries"),
        ({"P_grid": (1e8, 1e4)}, "simulate", "increasing"),
        ({"P_grid": (1e2, 1e3, 1e8)}, "simulate", "at least 3 grid points"),
        ({"n_active": 3}, "leakage-scaling", "n_active"),
        ({"K": 4, "alphas": (0, 0, 0, 0)}, "figure", "K=3"),
        ({"trials": 0}, "dof-table", "trials"),
        ({}, "plot", "unknown command"),
    ],
)
def test_validate_rejects(kw, command, msg):
    with pytest.raises(ConfigError, match=msg):
        validate(ExperimentConfig(**kw), command)


def test_validate_phase_plan():
    cfg = ExperimentConfig(scheme="arbitrary_k3", alphas=(0.5, 0.25, 0.0), phase_plan_n1=3, plan_gap=1e-3)
    assert validate(cfg, "simulate") is cfg
    with pytest.raises(ConfigError, match="phase plan"):
        validate(cfg.with_overrides(phase_plan_n1=1, plan_gap=1e-6), "simulate")


def test_check_relations():
    assert check("x", 1.05, 1.0, 0.1)["pass"]
    assert not check("x", 1.2, 1.0, 0.1)["pass"]
    assert check("x", -5.0, 0.0, 0.1, "le")["pass"]
    assert not check("x", float("nan"), 0.0, 1.0)["pass"]
    with pytest.raises(ValueError):
        check("x", 0, 0, 0, "ge")


# commands


def test_dof_table_rows():
    cfg = ExperimentConfig(alpha_rows=((0.1, 0, 0), (0.5, 0.25, 0)))
    rows = run_dof_table(cfg)["rows"]
    assert rows[0]["centralized_bound"] == pytest.approx(1.2)
    assert rows[0]["weak"] == pytest.approx(1.2)
    assert rows[0]["achievable_k3"] == pytest.approx(1.2)
    assert rows[0]["baseline_zf"] == 1.0
    assert rows[1]["achievable_k3"] == pytest.approx(12 / 7)
    assert rows[1]["weak"] is None
    two = run_dof_table(ExperimentConfig(K=2, alphas=(0, 0), alpha_rows=((0, 0),)))["rows"][0]
    assert two["centralized_bound"] == two["weak"] == two["baseline_zf"] == 1
    assert two["achievable_k3"] is None


def test_dof_table_exit_zero_and_json(tmp_path, capsys):
    code, out, _ = run(["dof-table", "--config", write(tmp_path, "c.json", {"alpha_step": 0.25})], capsys)
    man = json.loads(out)
    assert code == 0 and man["all_pass"] and man["command"] == "dof-table"
    assert man["config"]["alpha_step"] == 0.25
    assert len(man["rows"]) == 35


def test_config_error_exits_two(tmp_path, capsys):
    code, out, err = run(["simulate", "--config", write(tmp_path, "c.json", {"alphas": [0.3, 0, 0]})], capsys)
    assert code == 2 and out == "" and "weak-regime predicate" in err
    code, _, err = run(["simulate", "--config", write(tmp_path, "d.json", {"colour": "red"})], capsys)
    assert code == 2 and "unknown config keys" in err


def test_failed_check_exits_one(tmp_path, capsys):
    # a desk grid is far from the high-SNR regime of the weak scheme
    cfg = dict(SMALL, alphas=[0.2, 0, 0], tolerance=0.01)
    code, out, err = run(["simulate", "--config", write(tmp_path, "c.json", cfg)], capsys)
    man = json.loads(out)
    assert code == 1 and not man["all_pass"] and "FAIL sum_rate_slope" in err


def test_simulate_csv_layout(tmp_path, capsys):
    path = write(tmp_path, "c.json", dict(SMALL, format="csv"))
    code, out, _ = run(["simulate", "--config", path, "--seed", "5"], capsys)
    first, rest = out.split("\n", 1)
    assert first.startswith("# config=")
    echo = json.loads(first[len("# config="):])
    assert echo["seed"] == 5 and "out" not in echo
    rows = list(csv.reader(io.StringIO(rest)))
    assert rows[0] == ["P", "trial_count", "sum_rate_mean", "sum_rate_stderr", "rate_user0", "rate_user1", "rate_user2",
                       "side_info_required", "feasible", "empirical", "analytic_target", "tolerance", "pass"]
    assert len(rows) == 1 + len(SMALL["P_grid"])
    assert float(rows[1][0]) == 1e4 and rows[1][1] == "20"
    assert rows[1][-1] in ("true", "false")


@pytest.mark.parametrize("command,extra,first", [
    ("leakage-scaling", {"alphas": [0.5, 0, 0]}, "mean_leakage"),
    ("posterior-check", {"alphas": [0.5, 0.2, 0.0]}, "closed_form_variance"),
    ("figure", {"alpha_step": 0.25}, "curve"),
    ("dof-table", {"alpha_step": 0.5}, "K"),
])
def test_other_csv_headers(tmp_path, capsys, command, extra, first):
    path = write(tmp_path, "c.json", dict(SMALL, format="csv", **extra))
    code, out, _ = run([command, "--config", path], capsys)
    head = out.split("\n")[1].split(",")
    assert first in head
    if command != "figure":
        assert head[-4:] == ["empirical", "analytic_target", "tolerance", "pass"]


def test_out_file_and_format_override(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    code, stdout, _ = run(["figure", "--format", "csv", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    text = out.read_text()
    assert "achievable_a2=0.5" in text and "centralized_bound" in text


def test_workers_do_not_change_results(tmp_path, capsys):
    path = write(tmp_path, "c.json", dict(SMALL, scheme="arbitrary_k3", alphas=[0.5, 0.25, 0.0]))
    _, one, _ = run(["simulate", "--config", path], capsys)
    _, two, _ = run(["simulate", "--config", path, "--workers", "2"], capsys)
    assert one == two


def test_json_has_no_nan(tmp_path, capsys):
    # without CSIT the baseline has no private layer and some statistics are undefined
    path = write(tmp_path, "c.json", dict(SMALL, scheme="baseline_zf", alphas=[0.0, 0.0, 0.0]))
    _, out, _ = run(["simulate", "--config", path], capsys)
    assert "NaN" not in out and "Infinity" not in out
    json.loads(out)


def test_leakage_perfect_csit(tmp_path, capsys):
    path = write(tmp_path, "c.json", {"perfect_csit": True, "trials": 50, "P_grid": [1e2, 1e4, 1e6, 1e8]})
    code, out, _ = run(["leakage-scaling", "--config", path], capsys)
    man = json.loads(out)
    assert code == 0
    assert [c["check"] for c in man["checks"]] == ["leakage_exponent", "leakage_decay_ratio"]


def test_posterior_check_includes_peak_exponent(tmp_path, capsys):
    path = write(tmp_path, "c.json", {"alphas": [0.6, 0.2, 0.0], "trials": 2000, "P_grid": [1e4, 1e5, 1e6, 1e7, 1e8]})
    code, out, _ = run(["posterior-check", "--config", path], capsys)
    man = json.loads(out)
    assert code == 0
    assert man["checks"][-1]["check"] == "peak_density_exponent"
    assert man["checks"][-1]["analytic_target"] == pytest.approx(0.3)
