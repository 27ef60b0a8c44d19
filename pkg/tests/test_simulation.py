import math

import numpy as np
import pytest

from dbcs.confidence import CsConfig
from dbcs.contextual import contextual_path
from dbcs.errors import ConfigError
from dbcs.estimators import Arm, Contrast, estimate_path
from dbcs.policies import PolicyConfig
from dbcs.simulation import (
    AnalysisSpec,
    DgpSpec,
    TruthTrack,
    draw_potentials,
    dgp_streams,
    generate_round,
    population_contrast,
    rho_sweep,
    run_monte_carlo,
    run_trajectory,
    score_replication,
    simulate_arrays,
    truth_path,
)

TABLE2 = DgpSpec("ar1", K=4, horizon=300, mu=(1, 1.5, 1.25, 1), seed=5, rho_ar=0.1, beta=1.0)
BERN = DgpSpec("bernoulli", K=2, horizon=200, mu=(0.15, 0.27), seed=3)


def test_ar1_standard_normal():
    dgp = DgpSpec("ar1", K=2, horizon=10_000, mu=(0.0, 0.0), seed=1)
    pot, x = draw_potentials(dgp, dgp_streams(1, 0), dgp.horizon)
    assert abs(pot[:, 0].mean()) < 0.02
    assert abs(pot[:, 0].std() - 1.0) < 0.02
    assert set(np.unique(x)) == {0.0, 1.0}


def test_bernoulli_lift():
    dgp = DgpSpec("bernoulli", K=2, horizon=100_000, mu=(0.15, 0.27), seed=2)
    pot, _ = draw_potentials(dgp, dgp_streams(2, 0), dgp.horizon)
    tau = truth_path(pot, Contrast(1, 0))
    assert abs(tau[-1] - 0.12) < 0.01


def test_unit_root_variance_grows():
    dgp = DgpSpec("ar1", K=2, horizon=400, mu=(0.0, 0.0), seed=0, rho_ar=1.0)
    ends = np.array([draw_potentials(dgp, dgp_streams(0, r), 400)[0][[99, 399], 0] for r in range(400)])
    v100, v400 = ends.var(axis=0)
    assert 2.5 < v400 / v100 < 5.5


def test_streaming_rounds_equal_batch_draws():
    for dgp in (TABLE2, BERN):
        tr = TruthTrack(dgp.K)
        streams = dgp_streams(dgp.seed, 4)
        for _ in range(dgp.horizon):
            generate_round(dgp, tr, streams)
        pot, x = draw_potentials(dgp, dgp_streams(dgp.seed, 4), dgp.horizon)
        np.testing.assert_array_equal(tr.potentials(), pot)
        if x is not None:
            np.testing.assert_array_equal([tr.context(t)[0] for t in range(1, dgp.horizon + 1)], x[:, 0])


def test_truth_track_recursion():
    tr = TruthTrack(4)
    streams = dgp_streams(9, 0)
    for _ in range(500):
        generate_round(TABLE2, tr, streams)
    pot = tr.potentials()
    for t in (1, 17, 250, 500):
        np.testing.assert_allclose([tr.Q(t, w) for w in range(4)], pot[:t].mean(axis=0), rtol=0, atol=1e-12)
    np.testing.assert_allclose(tr.estimand_path(Contrast(2, 1)), truth_path(pot, Contrast(2, 1)), atol=1e-12)


def test_potentials_do_not_depend_on_policy():
    an = AnalysisSpec()
    pol = PolicyConfig(horizon=300)
    _, t1, _ = run_trajectory(TABLE2, pol, an, rep=2, policy_seed=1)
    _, t2, _ = run_trajectory(TABLE2, pol, an, rep=2, policy_seed=99)
    _, t3, _ = run_trajectory(TABLE2, PolicyConfig(kind="uniform", horizon=300), an, rep=2)
    np.testing.assert_array_equal(t1.potentials(), t2.potentials())
    np.testing.assert_array_equal(t1.potentials(), t3.potentials())


def test_streamed_trajectory_equals_batch():
    an = AnalysisSpec(methods=("ci", "asymp-cs"), estimands=(Contrast(1, 0), Arm(2)), contextual=True)
    pol = PolicyConfig(horizon=300)
    log, truth, series = run_trajectory(TABLE2, pol, an, rep=1)
    arr = simulate_arrays(TABLE2, pol, 1, 300)
    np.testing.assert_array_equal([o.a for o in log], arr.actions)
    np.testing.assert_array_equal([o.p for o in log], arr.probs)
    np.testing.assert_array_equal(truth.potentials(), arr.potentials)
    t, c, S = estimate_path(arr.actions, arr.probs, arr.rewards, Contrast(1, 0))
    np.testing.assert_array_equal(series[("ci", "tau(1,0)")].center, c)
    assert ("asymp-cs+x", "tau(1,0)") in series
    assert log.K == 4 and len(log) == 300 and log.context_dim == 1


def test_horizon_zero_is_empty():
    dgp = DgpSpec("bernoulli", K=2, horizon=0, mu=(0.5, 0.5))
    log, truth, series = run_trajectory(dgp, PolicyConfig(horizon=0), AnalysisSpec())
    assert len(log) == 0 and truth.horizon == 0
    assert all(len(s) == 0 for s in series.values())


def test_logged_propensities_satisfy_floor():
    log, _, _ = run_trajectory(TABLE2, PolicyConfig(horizon=300, p_floor=0.05), AnalysisSpec())
    assert min(min(o.p) for o in log) >= 0.05 - 1e-15


def test_single_rep_report_equals_indicators():
    an = AnalysisSpec(methods=("ci", "asymp-cs"))
    pol = PolicyConfig(horizon=200)
    rep = run_monte_carlo(BERN, pol, an, 1, seed=3)
    sc = score_replication(BERN, pol, an, 0, 800)
    ci = rep.row("ci")
    assert ci.coverage == float(sc[("ci", "tau(1,0)")].covered)
    assert ci.power == float(sc[("ci", "tau(1,0)")].excludes_zero)
    cs = rep.row("asymp-cs")
    s = sc[("asymp-cs", "tau(1,0)")]
    assert cs.stop_censored == (s.stop is None)
    if s.stop is not None:
        assert cs.stop_mean == s.stop


def test_determinism_regardless_of_workers():
    an = AnalysisSpec(methods=("ci", "asymp-cs", "exact-cs"), config=CsConfig(m=1 / 0.3))
    pol = PolicyConfig(horizon=200, p_floor=0.3)
    a = run_monte_carlo(BERN, pol, an, 40, seed=8, workers=1)
    b = run_monte_carlo(BERN, pol, an, 40, seed=8, workers=4)
    c = run_monte_carlo(BERN, pol, an, 40, seed=8, workers=3)
    assert a.rows == b.rows == c.rows
    assert a.config == b.config


def test_uniform_iid_calibration():
    dgp = DgpSpec("bernoulli", K=2, horizon=300, mu=(0.3, 0.3), seed=17)
    an = AnalysisSpec(methods=("ci",), estimands=(Contrast(1, 0), Arm(0), Arm(1)), population=True)
    rep = run_monte_carlo(dgp, PolicyConfig(kind="uniform", horizon=300), an, 600)
    se3 = 3 * math.sqrt(0.95 * 0.05 / 600)
    # arm means use an exact variance estimate
    for est in ("Q(0)", "Q(1)", "E[tau(1,0)]"):
        assert abs(rep.row("ci", est).coverage - 0.95) <= se3
    # the contrast variance drops the -(Y(1) - Y(0))^2 term, so it can only over-cover
    assert rep.row("ci", "tau(1,0)").coverage >= 0.95 - se3


def test_stopping_horizon_must_exceed_T():
    with pytest.raises(ConfigError) as exc:
        run_monte_carlo(BERN, PolicyConfig(horizon=200), AnalysisSpec(), 2, stopping_horizon=200)
    assert exc.value.field == "stopping_horizon"


def test_config_errors():
    with pytest.raises(ConfigError):
        DgpSpec("bernoulli", K=2, horizon=10, mu=(0.5, 1.5))
    with pytest.raises(ConfigError):
        DgpSpec("ar1", K=2, horizon=10, mu=(0, 0), rho_ar=1.5)
    with pytest.raises(ConfigError):
        AnalysisSpec(methods=("exact-cs",))
    with pytest.raises(ConfigError):
        run_monte_carlo(BERN, PolicyConfig(horizon=200), AnalysisSpec(contextual=True), 1)
    with pytest.raises(ConfigError):
        run_monte_carlo(BERN, PolicyConfig(horizon=200), AnalysisSpec(estimands=(Arm(5),)), 1)
    with pytest.raises(ConfigError):
        rho_sweep(TABLE2, [1.0], PolicyConfig(horizon=300), 2)


def test_population_contrast():
    assert population_contrast(BERN, 1, 0) == pytest.approx(0.12)
    assert population_contrast(TABLE2, 1, 0) == 1.5
    assert population_contrast(TABLE2, 1, 2) == 0.25
    an = AnalysisSpec(methods=("ci",), population=True)
    rep = run_monte_carlo(BERN, PolicyConfig(horizon=200), an, 5, seed=1)
    assert {r.estimand for r in rep.rows} == {"tau(1,0)", "E[tau(1,0)]"}


def test_rho_sweep_shape():
    rows = rho_sweep(TABLE2, [0.0, 0.9], PolicyConfig(horizon=300), 50, seed=4)
    assert [r.rho for r in rows] == [0.0, 0.9]
    for r in rows:
        assert 0 <= r.coverage <= 1
        assert r.coverage_se == pytest.approx(math.sqrt(r.coverage * (1 - r.coverage) / 50))


def test_residualization_reduces_variance():
    pol = PolicyConfig(horizon=300)
    ratios = []
    for rep in range(30):
        arr = simulate_arrays(TABLE2, pol, rep, 300)
        _, _, Sx = contextual_path(arr.actions, arr.probs, arr.rewards, arr.contexts, 1, 0)
        _, _, S = estimate_path(arr.actions, arr.probs, arr.rewards, Contrast(1, 0))
        ratios.append(Sx[-1] / S[-1])
    assert np.mean(ratios) < 1.0
