import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import truncnorm

from sharpsa.core import Problem
from sharpsa.harness import (
    AGGREGATE_HEADER,
    TRAJECTORY_HEADER,
    ConfigError,
    ExperimentConfig,
    FailureRateExceeded,
    InsufficientData,
    OutputError,
    aggregate,
    build_schedule,
    config_from_dict,
    fit_loglog,
    fit_tail,
    is_symmetric,
    load_config,
    run_experiment,
    run_linear_convergence,
    scaling_verdict,
    stationary_samples,
)
from sharpsa.problems import make_problem
from sharpsa.projections import Box


# ---------------------------------------------------------------- fits


@settings(max_examples=50)
@given(st.floats(-3.0, 3.0).filter(lambda p: p == 0 or abs(p) >= 0.01), st.floats(0.1, 100.0))
def test_loglog_recovers_power_law(p, c):
    t = np.arange(1, 5001, dtype=float)
    fit = fit_loglog(t, c * t**p, t_min=100)
    assert abs(fit.slope - p) < 1e-12
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_loglog_examples():
    t = np.arange(0, 2001, dtype=float)
    with np.errstate(divide="ignore"):
        assert fit_loglog(t, 1 / t).slope == pytest.approx(-1.0, abs=1e-12)
        assert fit_loglog(t, 5 / np.sqrt(t)).slope == pytest.approx(-0.5, abs=1e-12)


def test_loglog_drops_nonpositive_and_needs_points():
    t = np.arange(1, 301, dtype=float)
    v = 1.0 / t
    v[200:210] = 0.0
    v[210] = -1.0
    fit = fit_loglog(t, v, t_min=100)
    assert fit.n_dropped == 11 and fit.slope == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(InsufficientData):
        fit_loglog(t, v, t_min=295)


def test_loglog_window():
    t = np.arange(1, 1001, dtype=float)
    v = np.where(t <= 100, 1 / t, 0.01 * (t / 100) ** -2.0)
    assert fit_loglog(t, v, t_min=100).slope == pytest.approx(-2.0, abs=1e-12)
    assert fit_loglog(t, v, t_min=1, t_max=100).slope == pytest.approx(-1.0, abs=1e-12)


def test_tail_fit_exponential():
    s = np.random.default_rng(0).exponential(1 / 5, 100_000)
    fit = fit_tail(s, 1.0)
    assert fit.J_hat == pytest.approx(5.0, rel=0.05)
    assert fit.r2 > 0.99


def test_tail_fit_truncated_normal_control():
    gen = np.random.default_rng(1)
    expo = fit_tail(gen.exponential(1.0, 100_000), 1.0)
    tn = fit_tail(truncnorm.rvs(0, np.inf, size=100_000, random_state=gen), 1.0)
    # curvature of the Gaussian log tail leaves far more unexplained variance
    assert 1 - tn.r2 > 20 * (1 - expo.r2)
    assert tn.r2 < 0.995


def test_tail_fit_scales_with_alpha():
    s = np.random.default_rng(2).exponential(1.0, 10_000)
    assert fit_tail(s, 0.1).J_hat == pytest.approx(0.1 * fit_tail(s, 1.0).J_hat, rel=1e-12)


def test_tail_fit_needs_samples():
    with pytest.raises(InsufficientData):
        fit_tail(np.ones(10), 1.0)
    with pytest.raises(InsufficientData):
        fit_tail(np.ones(5000), 1.0)


def test_symmetry_check():
    gen = np.random.default_rng(3)
    assert is_symmetric(gen.standard_normal(50_000))[0]
    assert not is_symmetric(gen.exponential(1.0, 50_000))[0]


# ---------------------------------------------------------------- tail scaling


def test_scaling_exact_invariance():
    # Exp(c / alpha) samples: J_hat = -slope * alpha is the same c for each alpha
    c = 3.0
    base = np.random.default_rng(4).exponential(1.0, 20_000)
    alphas = [0.04, 0.02, 0.01]
    J = [fit_tail(base * a / c, a).J_hat for a in alphas]
    np.testing.assert_allclose(J, J[0], rtol=1e-10)
    v = scaling_verdict(alphas, J)
    assert v.passed and abs(v.log_slope) < 1e-9
    np.testing.assert_allclose(v.ratios, 1.0, rtol=1e-10)
    np.testing.assert_allclose(v.rates, np.array(J) / np.array(alphas))


def test_scaling_single_alpha():
    v = scaling_verdict([0.01], [0.3], [0.99])
    assert v.passed is None and v.log_slope is None
    assert v.rows() == [(0.01, 0.3, 30.0, 0.99)]


def test_scaling_rejects_linear_j():
    v = scaling_verdict([0.04, 0.02, 0.01], [0.4, 0.2, 0.1])
    assert v.passed is False and v.log_slope == pytest.approx(1.0)


def test_stationary_samples_quantities():
    p = make_problem("reflected1d")
    x = stationary_samples(p, 0.05, 200, 500, 0, quantity="x")
    g = stationary_samples(p, 0.05, 200, 500, 0, quantity="gap")
    np.testing.assert_allclose(g, (x + 1) ** 2 - 1)
    assert np.all(x >= 0)
    with pytest.raises(ValueError):
        stationary_samples(p, 0.05, 10, 10, 0, quantity="bogus")


# ---------------------------------------------------------------- runs


def _cfg(**kw):
    base = dict(problem="circle", iters=50, replications=3, master_seed=7, algorithm_params={"batch": 2})
    base.update(kw)
    return ExperimentConfig(**base)


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_single_step_writes_two_rows(tmp_path):
    run_experiment(_cfg(iters=1, replications=1), tmp_path)
    rows = _read(tmp_path / "trajectories.csv")
    assert tuple(rows[0]) == TRAJECTORY_HEADER
    assert [r[1] for r in rows[1:]] == ["0", "1"]
    assert tuple(_read(tmp_path / "aggregate.csv")[0]) == AGGREGATE_HEADER


def test_outputs_deterministic_and_thread_independent(tmp_path):
    run_experiment(_cfg(), tmp_path / "a")
    run_experiment(_cfg(), tmp_path / "b")
    run_experiment(_cfg(threads=2), tmp_path / "c")
    for name in ("trajectories.csv", "aggregate.csv"):
        ref = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == ref
        assert (tmp_path / "c" / name).read_bytes() == ref


def test_floats_round_trip(tmp_path):
    report = run_experiment(_cfg(), tmp_path)
    rows = _read(tmp_path / "aggregate.csv")[1:]
    back = np.array([float(r[3]) for r in rows])
    np.testing.assert_array_equal(back, report.aggregate["mean_gap"])


def test_fit_json_contents(tmp_path):
    run_experiment(_cfg(iters=300), tmp_path)
    info = json.loads((tmp_path / "fit.json").read_text())
    assert set(info["fit"]) >= {"slope", "intercept", "r2"}
    assert info["config"]["problem"] == "circle"
    assert info["version"] and info["wall_time_s"] >= 0 and info["failures"] == []


def test_short_run_reports_fit_error(tmp_path):
    report = run_experiment(_cfg(iters=50), tmp_path)
    assert report.fit is None and "points" in report.fit_error


def test_aggregate_statistics():
    class T:
        def __init__(self, g):
            self.t = np.arange(3)
            self.gap = np.asarray(g, dtype=float)
            self.dist = 2 * self.gap

    agg = aggregate([T([1, 2, 3]), T([3, 4, 5])])
    np.testing.assert_allclose(agg["mean_gap"], [2, 3, 4])
    np.testing.assert_allclose(agg["se_gap"], math.sqrt(2) / math.sqrt(2))
    np.testing.assert_allclose(agg["mean_dist"], [4, 6, 8])
    single = aggregate([T([1, 2, 3])])
    np.testing.assert_array_equal(single["se_gap"], 0.0)


def _fragile_problem():
    """1-d problem whose gradient oracle fails on roughly half the replications."""

    def sample_grad(x, rng, batch=1):
        if rng.random() < 0.02:
            raise FloatingPointError("boom")
        return np.array([1.0])

    return Problem(
        name="fragile",
        dimension=1,
        objective=lambda x: float(x[0]),
        grad=lambda x: np.array([1.0]),
        sample_grad=sample_grad,
        feasible=Box([0.0], [1.0]),
        optimum=np.array([0.0]),
        opt_value=0.0,
        x0=np.array([1.0]),
    )


def test_failure_rate_exceeded(tmp_path):
    cfg = _cfg(iters=40, replications=10)
    with pytest.raises(FailureRateExceeded) as info:
        run_experiment(cfg, tmp_path, problem=_fragile_problem())
    assert info.value.failures > 0
    report = json.loads((tmp_path / "fit.json").read_text())
    assert report["successful"] + len(report["failures"]) == 10


def test_output_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError) as info:
        run_experiment(_cfg(iters=1, replications=1), blocker / "sub")
    assert "file" in str(info.value)


def test_linear_convergence_single_stage():
    cfg = _cfg(schedule={"kind": "staged", "rates": [0.5], "lengths": [30]}, replications=2)
    rep = run_linear_convergence(cfg)
    assert rep.stage_ends.tolist() == [30]
    assert rep.mean_errors.size == 2 and rep.ratios.size == 1
    assert rep.mean_ratio() == pytest.approx(rep.mean_errors[1] / rep.mean_errors[0])


def test_linear_convergence_flags():
    cfg = _cfg(schedule={"kind": "halving", "alpha0": 1.0, "stages": 4, "every": 20}, replications=4)
    rep = run_linear_convergence(cfg, flag_above=0.0)
    assert rep.flagged == [1, 2, 3, 4]
    assert json.loads(json.dumps(rep.to_dict()))["flagged"] == [1, 2, 3, 4]


def test_linear_convergence_needs_staged():
    with pytest.raises(TypeError):
        run_linear_convergence(_cfg())


# ---------------------------------------------------------------- config


def test_load_config_file(tmp_path):
    f = tmp_path / "c.toml"
    f.write_text(
        '[experiment]\nproblem = "lp2"\niters = 10\nreplications = 2\n'
        '[schedule]\nkind = "power"\na = 0.5\nu = 1\ngamma = 1\n'
        "[algorithm_params]\nbatch = 5\n[fit]\nt_min = 5\n"
    )
    cfg = load_config(f)
    assert cfg.problem == "lp2" and cfg.fit_t_min == 5.0
    alg = cfg.build_algorithm()
    assert alg.batch == 5 and alg.schedule.rate(1) == pytest.approx(0.25)


@pytest.mark.parametrize(
    "raw",
    [
        {},
        {"experiment": {"problem": "nope"}},
        {"experiment": {"problem": "circle", "algorithm": "adam"}},
        {"experiment": {"problem": "circle", "iters": 0}},
        {"experiment": {"problem": "circle", "colour": 1}},
        {"experiment": {"problem": "circle"}, "extra": {}},
        {"experiment": {"problem": "circle"}, "schedule": {"kind": "staged"}},
        {"experiment": {"problem": "circle"}, "schedule": {"kind": "power", "a": -1}},
        {"experiment": {"problem": "circle"}, "fit": {"quantity": "loss"}},
    ],
)
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[experiment\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_halving_schedule():
    s = build_schedule({"kind": "halving", "alpha0": 1.0, "stages": 3, "every": 20})
    assert s.rates == (1.0, 0.5, 0.25) and s.lengths == (20, 20, 20)


def test_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("SHARPSA_OUT", str(tmp_path))
    assert _cfg(name="x").resolved_output_dir() == tmp_path / "x"
