"""Experiment runners: statistics toolbox, gates, determinism, small runs."""

import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal, norm

from mixkde.bandwidth import BandwidthSchedule
from mixkde.estimator import Grid, cdf_clt_statistic
from mixkde.kernels import kernel_from_name
from mixkde.processes import ProcessModel, generate_path, marginal_cdf
from mixkde.util import derive_seed
from mixkde.experiments import (
    CLT_KINDS,
    GateError,
    ExperimentConfig,
    check_gates,
    fit_loglog_slope,
    ks_statistic,
    resolve_threads,
    run_experiment,
    validate_shape,
)

IID = ProcessModel(family="iid")
AR_HALF = ProcessModel(family="ar1", phi=0.5)
GAUSS = kernel_from_name("gaussian")
EPAN = kernel_from_name("epanechnikov")


def _config(**overrides):
    base = dict(
        kind="clt_density",
        model=IID,
        kernel=GAUSS,
        schedule=BandwidthSchedule(c=1.0, delta=0.2),
        n_list=(512,),
        replicates=150,
        base_seed=7,
        eval_points=(0.0,),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# statistics toolbox


def test_ks_near_perfect_quantile_sample():
    n = 500
    samples = norm.ppf((np.arange(1, n + 1)) / (n + 1))
    assert ks_statistic(samples, norm.cdf) < 1.0 / n + norm.pdf(0.0) * 6.0 / n


def test_ks_point_mass_is_half():
    assert ks_statistic(np.zeros(100), norm.cdf) == pytest.approx(0.5, abs=1e-12)


def test_ks_normal_draws_within_null_band():
    rng = np.random.default_rng(314)
    z = rng.standard_normal(2000)
    assert ks_statistic(z, norm.cdf) < 1.63 / math.sqrt(2000)


def test_ks_needs_two_samples():
    with pytest.raises(ValueError):
        ks_statistic(np.array([1.0]), norm.cdf)


def test_loglog_exact_square():
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_loglog_slope(xs, xs**2)
    assert fit["slope"] == pytest.approx(2.0, abs=1e-12)
    assert fit["r_squared"] == pytest.approx(1.0, abs=1e-12)
    assert fit["slope_stderr"] == pytest.approx(0.0, abs=1e-12)


def test_loglog_constant():
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_loglog_slope(xs, np.full(4, 3.7))
    assert fit["slope"] == pytest.approx(0.0, abs=1e-12)
    assert fit["r_squared"] == 1.0  # zero residual on a flat line


def test_loglog_noisy_power_law():
    rng = np.random.default_rng(11)
    xs = np.logspace(1, 4, 20)
    ys = 3.0 * xs**-0.4 * (1.0 + 0.01 * rng.standard_normal(20))
    fit = fit_loglog_slope(xs, ys)
    assert fit["slope"] == pytest.approx(-0.4, abs=0.02)
    assert fit["slope_stderr"] < 0.02


def test_loglog_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        fit_loglog_slope([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_loglog_slope([1.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        fit_loglog_slope([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])


# ---------------------------------------------------------------------------
# gates


def test_gate_names_per_kind():
    named = {
        "clt_density": {"B1", "C2", "K1", "f(x) > 0", "rho-summable"},
        "clt_cdf_centered": {"B1", "C2", "K-symmetric", "0 < F(x) < 1", "rho-summable"},
        "clt_cdf_true": {"B3", "C3", "K-symmetric", "K-compact", "0 < F(x) < 1", "rho-summable"},
        "rate_sup_lp": {"p >= 2", "B1", "C1", "K1", "rho-summable", "f(x) > 0"},
        "rate_integral_lp": {"p >= 2", "B1", "C1", "K1", "rho-summable"},
        "uniform_as": {"B2", "C1", "K2", "rho(1) <= 1/4", "rho-summable"},
        "bias": {"C3", "K3"},
        "moment_bound": {"markov-model", "p-even"},
    }
    for kind, want in named.items():
        cfg = _config(
            kind=kind,
            kernel=EPAN,
            schedule=BandwidthSchedule(c=1.0, delta=0.6),
            n_list=(64, 128, 256),
            replicates=150,
            eval_points=(0.5,),
            p=2.0,
        )
        got = {g.condition for g in check_gates(cfg)}
        assert got == want, kind


def test_gate_rejection_b1():
    cfg = _config(schedule=BandwidthSchedule(c=1.0, delta=1.2))
    with pytest.raises(GateError, match=r"\(B1\) fails") as err:
        run_experiment(cfg)
    assert err.value.condition == "B1"


def test_gate_rejection_b3_for_true_center():
    cfg = _config(kind="clt_cdf_true", kernel=EPAN, eval_points=(0.5,))
    with pytest.raises(GateError, match=r"\(B3\) fails"):
        run_experiment(cfg)


def test_gate_rejection_rho1():
    cfg = _config(
        kind="uniform_as",
        model=AR_HALF,
        kernel=EPAN,
        schedule=BandwidthSchedule(c=1.0, delta=0.3),
        n_list=(256, 512, 1024),
        replicates=2,
    )
    with pytest.raises(GateError, match=r"rho\(1\)=0.5 > 1/4"):
        run_experiment(cfg)


def test_gate_rejection_k2_for_gaussian_and_uniform_kernels():
    for kernel in (GAUSS, kernel_from_name("uniform")):
        cfg = _config(
            kind="uniform_as",
            kernel=kernel,
            schedule=BandwidthSchedule(c=1.0, delta=0.3),
            n_list=(256, 512, 1024),
            replicates=2,
        )
        with pytest.raises(GateError, match=r"\(K2\) fails"):
            run_experiment(cfg)


def test_gate_rejection_small_p():
    cfg = _config(kind="rate_sup_lp", n_list=(64, 128, 256), p=1.5)
    with pytest.raises(GateError, match=r"p >= 2"):
        run_experiment(cfg)


def test_gate_rejection_ma_for_moment_bound():
    cfg = _config(kind="moment_bound", model=ProcessModel(family="ma", weights=(1.0, 0.3)),
                  n_list=(6, 7, 8), p=2.0)
    with pytest.raises(GateError, match="markov-model"):
        run_experiment(cfg)


def test_gate_rejection_odd_p_for_moment_bound():
    cfg = _config(kind="moment_bound", model=AR_HALF, n_list=(6, 7, 8), p=3.0)
    with pytest.raises(GateError, match="p-even"):
        run_experiment(cfg)


def test_clt_cdf_true_requires_compact_kernel():
    cfg = _config(
        kind="clt_cdf_true",
        schedule=BandwidthSchedule(c=1.0, delta=0.6),
        eval_points=(0.5,),
        kernel=GAUSS,
    )
    with pytest.raises(GateError, match="K-compact"):
        run_experiment(cfg)


# ---------------------------------------------------------------------------
# config and shape validation


def test_config_validation():
    with pytest.raises(ValueError, match="unknown experiment kind"):
        _config(kind="clt")
    with pytest.raises(ValueError, match="strictly increasing"):
        _config(n_list=(512, 512))
    with pytest.raises(ValueError, match="at least 100 replicates"):
        _config(replicates=50)
    with pytest.raises(ValueError, match="n_list entries"):
        _config(n_list=(0,))
    with pytest.raises(ValueError, match="base_seed"):
        _config(base_seed="7")


def test_validate_shape():
    with pytest.raises(ValueError, match="evaluation point"):
        validate_shape(_config(eval_points=()))
    with pytest.raises(ValueError, match="at least 3 sample sizes"):
        validate_shape(_config(kind="rate_sup_lp", n_list=(64, 128), eval_points=(0.0,)))
    validate_shape(_config())  # fine as built


def test_resolve_threads():
    assert resolve_threads(3) == 3
    assert resolve_threads(0) >= 1
    assert resolve_threads(None) >= 1
    with pytest.raises(ValueError):
        resolve_threads(-1)
    with pytest.raises(ValueError):
        resolve_threads(1.5)


# ---------------------------------------------------------------------------
# runs


def test_clt_run_shape_and_determinism():
    cfg = _config(eval_points=(-1.0, 0.0, 1.0))
    rep1 = run_experiment(cfg, threads=1)
    rep2 = run_experiment(cfg, threads=4)
    assert rep1.to_json() == rep2.to_json()
    assert [r["x"] for r in rep1.rows] == [-1.0, 0.0, 1.0]
    for row in rep1.rows:
        assert set(row) >= {"x", "n", "h", "ks", "mean", "variance"}
    pooled = np.mean([r["variance"] for r in rep1.rows])
    assert rep1.summary["pooled_variance"] == pytest.approx(float(pooled), abs=1e-15)
    assert rep1.verdict in ("pass", "fail")
    assert rep1.config["base_seed"] == 7


def test_replicate_paths_keyed_by_derived_seed():
    cfg = _config()
    rep = run_experiment(cfg)
    shifted = run_experiment(_config(base_seed=8))
    assert rep.to_json() != shifted.to_json()


def test_mc_stderr_scales_with_replicates():
    """Doubling replicates should shrink the MC error by about sqrt(2)."""
    common = dict(
        kind="rate_sup_lp",
        kernel=EPAN,
        schedule=BandwidthSchedule(c=1.0, delta=0.6),
        n_list=(256, 512, 1024),
        eval_points=(0.0,),
        p=2.0,
    )
    r1 = run_experiment(_config(replicates=200, **common), threads=4)
    r2 = run_experiment(_config(replicates=400, **common), threads=4)
    for a, b in zip(r1.rows, r2.rows):
        ratio = a["mc_stderr"] / b["mc_stderr"]
        assert ratio == pytest.approx(math.sqrt(2.0), rel=0.2)


def test_rate_slope_reaches_prediction_at_desk_scale():
    cfg = _config(
        kind="rate_sup_lp",
        kernel=EPAN,
        schedule=BandwidthSchedule(c=1.0, delta=0.6),
        n_list=(256, 512, 1024, 2048, 4096),
        replicates=100,
        eval_points=(-1.0, 0.0, 1.0),
        p=2.0,
    )
    rep = run_experiment(cfg, threads=4)
    assert rep.theorem_prediction == pytest.approx(-0.2, abs=1e-12)
    assert abs(rep.slope["slope"] - rep.theorem_prediction) <= 0.1
    assert rep.verdict == "pass"
    assert {"slope", "intercept", "r_squared", "slope_stderr", "half_width"} <= set(rep.slope)


def test_uniform_run_reports_paths():
    cfg = _config(
        kind="uniform_as",
        model=ProcessModel(family="ar1", phi=0.2),
        kernel=EPAN,
        schedule=BandwidthSchedule(c=1.0, delta=0.3),
        n_list=(1024, 2048, 4096, 8192),
        replicates=4,
        grid=Grid(-2.0, 2.0, 201),
    )
    rep = run_experiment(cfg, threads=2)
    assert len(rep.summary["paths"]) == 4
    assert rep.summary["paths_needed"] == math.ceil(0.95 * 4)
    for entry in rep.summary["paths"]:
        assert entry["max_ratio"] >= entry["median_ratio"] > 0.0
    assert rep.theorem_prediction == 0.0


def test_bias_run_slopes_and_bound():
    cfg = _config(
        kind="bias",
        n_list=tuple(2**j for j in range(5, 14)),
        replicates=1,
        eval_points=(0.5, 1.0),
    )
    rep = run_experiment(cfg)
    assert all(row["within_bound"] for row in rep.rows)
    assert rep.summary["min_slope"] >= 0.9
    assert rep.verdict == "pass"


def test_moment_bound_run_levels():
    cfg = _config(
        kind="moment_bound",
        model=ProcessModel(family="ar1", phi=0.25),
        n_list=(6, 7, 8),
        replicates=150,
        p=2.0,
    )
    rep = run_experiment(cfg)
    assert [row["k"] for row in rep.rows] == [6, 7, 8]
    assert rep.verdict == "pass"
    assert rep.summary["ratio_spread"] >= 1.0

    iid_rep = run_experiment(_config(kind="moment_bound", n_list=(6, 7, 8), replicates=150, p=2.0))
    assert iid_rep.summary["ratios"] == [0.0, 0.0, 0.0]
    assert iid_rep.verdict == "pass"


def test_report_json_is_parseable():
    import json

    rep = run_experiment(_config())
    doc = json.loads(rep.to_json())
    assert doc["kind"] == "clt_density"
    assert doc["config"]["model"]["family"] == "iid"
    assert isinstance(doc["gates"], list) and doc["gates"][0]["condition"] == "B1"


def test_dependent_cdf_statistic_variance_tracks_long_run_covariance():
    """The raw F(1-F) standardization is too small under dependence.

    For the AR(1) model the indicator series has a long-run variance well
    above its marginal variance; the normalized statistic's variance settles
    near sigma2_LR / (F(1-F)), not near 1. This pins the measured behavior
    so any change to the statistic or the generator shows up.
    """
    x, phi = 0.5, 0.5
    model = ProcessModel(family="ar1", phi=phi)
    F = marginal_cdf(model, x)
    s2 = model.marginal_sd**2
    target = F * (1.0 - F)
    for lag in range(1, 80):
        r = phi**lag
        joint = multivariate_normal(mean=[0.0, 0.0], cov=[[s2, r * s2], [r * s2, s2]])
        cov = joint.cdf([x, x]) - F * F
        target += 2.0 * cov
        if cov < 1e-13:
            break
    ratio = target / (F * (1.0 - F))

    n, reps = 4096, 400
    h = float(n) ** (-0.2)
    stats = np.empty(reps)
    for r in range(reps):
        path = generate_path(model, n, seed=derive_seed(321, r))
        stats[r] = cdf_clt_statistic(path, EPAN, h, x)
    v = float(stats.var(ddof=1))
    se = v * math.sqrt(2.0 / (reps - 1))
    assert 1.9 < v < 2.6
    assert abs(v - ratio) < 3.0 * se


def test_clt_kinds_constant():
    assert set(CLT_KINDS) == {"clt_density", "clt_cdf_centered", "clt_cdf_true"}
