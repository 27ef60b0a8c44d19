import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbcs.errors import (
    DimensionMismatch,
    OrderViolation,
    ParseError,
    PropensityViolation,
    RewardBoundViolation,
    SchemaError,
)
from dbcs.log import (
    Observation,
    ObservationLog,
    append_observation,
    build_log,
    check_propensities,
    parse_log,
    read_log,
    serialize_log,
    write_log,
)


def test_append_minimal():
    log = append_observation(ObservationLog(K=2), Observation(1, (0.5, 0.5), 1, 1.0))
    assert len(log) == 1
    assert log[0].y == 1.0


def test_degenerate_propensity_rejected():
    with pytest.raises(PropensityViolation):
        append_observation(ObservationLog(K=2), Observation(1, (1.0, 0.0), 0, 1.0))


def test_gap_in_rounds_rejected():
    log = append_observation(ObservationLog(K=2), Observation(1, (0.5, 0.5), 1, 1.0))
    with pytest.raises(OrderViolation):
        append_observation(log, Observation(3, (0.5, 0.5), 1, 1.0))


def test_declared_bounds_enforced():
    log = ObservationLog(K=2, M=1.0, p_min=0.2)
    with pytest.raises(RewardBoundViolation):
        append_observation(log, Observation(1, (0.5, 0.5), 0, 1.5))
    with pytest.raises(PropensityViolation):
        append_observation(log, Observation(1, (0.9, 0.1), 0, 0.5))
    assert log.m == pytest.approx(5.0)


def test_propensity_sum_tolerance():
    check_propensities((0.5, 0.5 + 5e-10), 2)
    with pytest.raises(PropensityViolation):
        check_propensities((0.5, 0.5 + 1e-8), 2)


def test_context_dimension_fixed():
    log = append_observation(ObservationLog(K=2), Observation(1, (0.5, 0.5), 0, 0.0, x=(1.0,)))
    with pytest.raises(DimensionMismatch):
        append_observation(log, Observation(2, (0.5, 0.5), 0, 0.0, x=(1.0, 2.0)))
    with pytest.raises(DimensionMismatch):
        append_observation(log, Observation(2, (0.5, 0.5), 0, 0.0))


def test_parse_single_record():
    log = parse_log(b'{"K":2}\n{"t":1,"p":[0.5,0.5],"a":0,"y":0.0}\n')
    assert len(log) == 1
    assert log[0].p == (0.5, 0.5)


def test_missing_field_names_field():
    with pytest.raises(SchemaError) as exc:
        parse_log(b'{"K":2}\n{"t":1,"a":0,"y":0.0}\n')
    assert exc.value.field == "p"
    assert exc.value.line == 2


def test_parse_error_line_number():
    with pytest.raises(ParseError) as exc:
        parse_log(b'{"K":2}\n{"t":1,"p":[0.5,0.5],"a":0,"y":0.0}\n{not json\n')
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse_log(b"")


def test_violation_cites_line():
    rows = [b'{"K":2}'] + [b'{"t":%d,"p":[0.5,0.5],"a":0,"y":0.0}' % t for t in range(1, 20)]
    rows[16] = b'{"t":16,"p":[0.0,1.0],"a":1,"y":0.0}'
    with pytest.raises(PropensityViolation) as exc:
        parse_log(b"\n".join(rows) + b"\n")
    assert exc.value.line == 17
    assert "line 17" in str(exc.value)


def test_rescan_of_accepted_log():
    rows = [Observation(t, (0.3, 0.7), t % 2, 0.25 * t) for t in range(1, 6)]
    log = build_log(2, rows, M=2.0, p_min=0.3)
    for obs in log:
        check_propensities(obs.p, 2, 0.3)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)


@st.composite
def logs(draw):
    K = draw(st.integers(2, 5))
    n = draw(st.integers(0, 12))
    ctx = draw(st.sampled_from([None, 1, 3]))
    obs = []
    for t in range(1, n + 1):
        raw = draw(st.lists(st.floats(0.05, 1.0), min_size=K, max_size=K))
        total = math.fsum(raw)
        p = [v / total for v in raw]
        p[-1] = 1.0 - math.fsum(p[:-1])
        x = None if ctx is None else tuple(draw(st.lists(finite, min_size=ctx, max_size=ctx)))
        obs.append(Observation(t, tuple(p), draw(st.integers(0, K - 1)), draw(finite), x))
    meta = draw(st.sampled_from([None, {"seed": 3}]))
    return build_log(K, obs, meta=meta)


@settings(max_examples=150, deadline=None)
@given(logs())
def test_round_trip_identity(log):
    data = serialize_log(log)
    back = parse_log(data)
    assert back == log
    assert serialize_log(back) == data


def test_file_round_trip(tmp_path):
    log = build_log(3, [Observation(1, (0.2, 0.3, 0.5), 2, 0.1 + 0.2, (1.0 / 3.0,))], M=1.0, p_min=0.2)
    path = tmp_path / "log.jsonl"
    write_log(log, path)
    assert read_log(path) == log
    assert path.read_bytes().endswith(b"\n")
