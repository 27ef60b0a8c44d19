import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbcs.errors import EmptyState, OrderViolation, OutOfRange
from dbcs.estimators import (
    Arm,
    Contrast,
    estimate_path,
    fold,
    new_state,
    parse_estimand,
    q_hat,
    s_contrast,
    tau_hat,
    true_estimands,
    update_arm,
    update_contrast,
)
from dbcs.log import Observation
from dbcs.simulation import DgpSpec, TruthTrack, draw_potentials, dgp_streams
from oracles import TABLES, adaptive_p1, enumerate_paths, ipw


def obs(t, a, y, p):
    return Observation(t, p, a, y)


def test_arm_update_examples():
    s1 = update_arm(new_state(Arm(1)), obs(1, 1, 2.0, (0.5, 0.5)))
    assert (s1.sum_tau, s1.S) == (4.0, 8.0)
    s0 = update_arm(new_state(Arm(0)), obs(1, 1, 2.0, (0.5, 0.5)))
    assert (s0.sum_tau, s0.S) == (0.0, 0.0)
    s2 = update_arm(s1, obs(2, 1, 1.0, (0.75, 0.25)))
    assert (s2.sum_tau, s2.S) == (8.0, 20.0)
    s3 = update_arm(s2, obs(3, 0, 5.0, (0.75, 0.25)))
    assert q_hat(s3) == pytest.approx(8.0 / 3.0, abs=1e-15)


def test_q_hat_never_chosen_and_constant():
    s = new_state(Arm(1))
    for t in range(1, 6):
        s = update_arm(s, obs(t, 0, 3.0, (0.6, 0.4)))
    assert q_hat(s) == 0.0
    eps = 0.01
    s = new_state(Arm(0))
    for t in range(1, 6):
        s = update_arm(s, obs(t, 0, 2.0, (1 - eps, eps)))
    assert q_hat(s) == pytest.approx(2.0 / (1 - eps), rel=1e-14)


def test_contrast_examples():
    o = obs(1, 1, 2.0, (0.5, 0.5))
    s = update_contrast(new_state(Contrast(1, 0)), o)
    assert (tau_hat(s), s_contrast(s)) == (4.0, 16.0)
    r = update_contrast(new_state(Contrast(0, 1)), o)
    assert (tau_hat(r), s_contrast(r)) == (-4.0, 16.0)
    same = update_contrast(new_state(Contrast(1, 1)), o)
    assert tau_hat(same) == 0.0


def test_empty_state_and_order():
    with pytest.raises(EmptyState):
        q_hat(new_state(Arm(0)))
    with pytest.raises(EmptyState):
        tau_hat(new_state(Contrast(1, 0)))
    with pytest.raises(EmptyState):
        s_contrast(new_state(Contrast(1, 0)))
    with pytest.raises(OrderViolation):
        update_arm(new_state(Arm(0)), obs(2, 0, 1.0, (0.5, 0.5)))


def test_parse_estimand():
    assert parse_estimand("Q(2)") == Arm(2)
    assert parse_estimand("tau( 1 , 0 )") == Contrast(1, 0)
    assert Contrast(1, 0).label == "tau(1,0)"
    with pytest.raises(ValueError):
        parse_estimand("mu(1)")


def test_true_estimands():
    tr = TruthTrack(2)
    for row in ((0.0, 1.0), (5.0, 2.0), (1.0, 3.0)):
        tr.append(row)
    q, tau = true_estimands(tr, 3, 1, 0)
    assert q == 2.0
    assert tau == 0.0
    with pytest.raises(OutOfRange):
        true_estimands(tr, 4, 1, 0)
    twin = TruthTrack(3)
    for v in (0.3, -1.0, 2.5):
        twin.append((v, v, v))
    assert all(true_estimands(twin, t, 2, 0)[1] == 0.0 for t in (1, 2, 3))


def test_truth_law_of_large_numbers():
    dgp = DgpSpec("bernoulli", K=2, horizon=100_000, mu=(0.15, 0.27), seed=11)
    pot, _ = draw_potentials(dgp, dgp_streams(11, 0), dgp.horizon)
    tr = TruthTrack.from_arrays(pot)
    assert abs(tr.Q(dgp.horizon, 1) - 0.27) < 0.005


# --- exact expectations by enumeration -----------------------------------------------


@pytest.mark.parametrize("table_id", range(3))
@pytest.mark.parametrize("T", (1, 2, 3))
def test_unbiasedness_by_enumeration(table_id, T):
    table = TABLES[table_id]
    rule = lambda h: adaptive_p1(table_id, h)  # noqa: E731
    total = 0.0
    e_q = np.zeros((T, 2))
    e_tau = np.zeros(T)
    for prob, actions, rewards, probs in enumerate_paths(table, rule, T):
        total += prob
        log = [obs(t + 1, actions[t], rewards[t], probs[t]) for t in range(T)]
        for w in (0, 1):
            for t, s in enumerate(fold(Arm(w), log)):
                e_q[t, w] += prob * q_hat(s)
        for t, s in enumerate(fold(Contrast(1, 0), log)):
            e_tau[t] += prob * tau_hat(s)
    assert total == pytest.approx(1.0, abs=1e-15)
    for t in range(T):
        Q = [sum(table[j][w] for j in range(t + 1)) / (t + 1) for w in (0, 1)]
        np.testing.assert_allclose(e_q[t], Q, rtol=0, atol=1e-12)
        assert abs(e_tau[t] - (Q[1] - Q[0])) <= 1e-12


@pytest.mark.parametrize("table_id", range(3))
def test_variance_identity_and_bound(table_id):
    """Conditional on every history, the variance summands have the right mean."""
    table = TABLES[table_id]
    T = 3
    rule = lambda h: adaptive_p1(table_id, h)  # noqa: E731
    for prob, actions, rewards, probs in enumerate_paths(table, rule, T):
        for t in range(T):
            p = probs[t]
            y = table[t]
            # conditional law of round t given the realized past of this path
            for w in (0, 1):
                mean = sum(p[a] * ipw(a, y[a], p, w) for a in (0, 1))
                var = sum(p[a] * (ipw(a, y[a], p, w) - mean) ** 2 for a in (0, 1))
                e_sig = 0.0
                for a in (0, 1):
                    s = update_arm(new_state(Arm(w)), obs(1, a, y[a], p))
                    e_sig += p[a] * s.S
                assert abs(e_sig - var) <= 1e-12
            dmean = sum(p[a] * (ipw(a, y[a], p, 1) - ipw(a, y[a], p, 0)) for a in (0, 1))
            dvar = sum(p[a] * (ipw(a, y[a], p, 1) - ipw(a, y[a], p, 0) - dmean) ** 2 for a in (0, 1))
            e_sig = sum(p[a] * update_contrast(new_state(Contrast(1, 0)), obs(1, a, y[a], p)).S for a in (0, 1))
            assert e_sig >= dvar - 1e-12


# --- properties -------------------------------------------------------------------------------


@st.composite
def two_plus_arm_logs(draw):
    K = draw(st.integers(2, 4))
    n = draw(st.integers(1, 40))
    rows = []
    for t in range(1, n + 1):
        raw = draw(st.lists(st.floats(0.05, 1.0), min_size=K, max_size=K))
        total = math.fsum(raw)
        p = tuple(v / total for v in raw)
        rows.append(obs(t, draw(st.integers(0, K - 1)), draw(st.floats(-50, 50)), p))
    return K, rows


@settings(max_examples=100, deadline=None)
@given(two_plus_arm_logs(), st.data())
def test_streaming_equals_batch(k_rows, data):
    K, rows = k_rows
    w = data.draw(st.integers(0, K - 1))
    w2 = data.draw(st.integers(0, K - 1))
    a = np.array([o.a for o in rows])
    p = np.array([o.p for o in rows])
    y = np.array([o.y for o in rows])
    for est in (Arm(w), Contrast(w, w2)):
        states = list(fold(est, rows))
        t, c, S = estimate_path(a, p, y, est)
        np.testing.assert_array_equal(c, [s.estimate for s in states])
        np.testing.assert_array_equal(S, [s.S for s in states])
        # from-scratch recomputation with plain floats
        for i, s in enumerate(states):
            ref = sum(
                (ipw(o.a, o.y, o.p, est.w) - (ipw(o.a, o.y, o.p, est.w2) if isinstance(est, Contrast) else 0.0))
                for o in rows[: i + 1]
            ) / (i + 1)
            assert s.estimate == pytest.approx(ref, rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(two_plus_arm_logs())
def test_swap_and_monotone_variance(k_rows):
    K, rows = k_rows
    fwd = list(fold(Contrast(1, 0), rows))
    rev = list(fold(Contrast(0, 1), rows))
    arm = list(fold(Arm(0), rows))
    for f, r in zip(fwd, rev):
        assert f.sum_diff == -r.sum_diff
        assert f.S == r.S
    for seq in (fwd, arm):
        S = [s.S for s in seq]
        assert S[0] >= 0
        assert all(b >= a for a, b in zip(S, S[1:]))
