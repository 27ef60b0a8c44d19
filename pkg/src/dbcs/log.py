"""Data model for adaptively collected bandit data.

A log is a header (arm count and the optional a-priori bounds ``M`` and
``p_min``) followed by one :class:`Observation` per round.  Every round stores
the *full* propensity vector, because a contrast between two arms needs the
probability of the arm that was not pulled as well.

The on-disk format is JSON lines::

    {"K":2,"M":1.0,"p_min":0.25}
    {"t":1,"p":[0.5,0.5],"a":1,"y":1.0}
    {"t":2,"p":[0.5,0.5],"a":0,"y":0.0,"x":[1.0]}

Floats are written with ``repr`` precision, so ``parse_log(serialize_log(log))``
reproduces every value bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    DimensionMismatch,
    OrderViolation,
    ParseError,
    PropensityViolation,
    RewardBoundViolation,
    SchemaError,
)

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Observation:
    """One logged round.

    Parameters
    ----------
    t : int
        Round index, starting at 1.
    p : tuple of float
        Propensity of every arm at this round, as used for sampling.
    a : int
        Arm that was pulled.
    y : float
        Realized reward of the pulled arm.
    x : tuple of float, optional
        Context observed before the action was drawn.
    """

    t: int
    p: tuple
    a: int
    y: float
    x: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if self.x is not None:
            object.__setattr__(self, "x", tuple(float(v) for v in self.x))

    @property
    def K(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class ObservationLog:
    """An ordered, validated sequence of observations.

    ``M`` (reward bound) and ``p_min`` (propensity floor) are declared by the
    experimenter before data collection; they are never inferred from data.
    ``meta`` carries free-form provenance (config echo, seed) and survives
    a serialization round trip.
    """

    K: int
    observations: tuple = ()
    M: Optional[float] = None
    p_min: Optional[float] = None
    meta: Optional[dict] = field(default=None, compare=True)

    def __post_init__(self):
        if not isinstance(self.K, int) or self.K < 2:
            raise DimensionMismatch(f"K must be an integer >= 2, got {self.K!r}")
        if self.M is not None and not (self.M > 0 and math.isfinite(self.M)):
            raise SchemaError("M", detail="reward bound must be positive and finite")
        if self.p_min is not None and not (0.0 < self.p_min < 1.0 / self.K + 1e-15):
            raise SchemaError("p_min", detail="propensity floor must lie in (0, 1/K]")

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self) -> Iterator[Observation]:
        return iter(self.observations)

    def __getitem__(self, i):
        return self.observations[i]

    @property
    def m(self) -> Optional[float]:
        """Worst-case IPW summand magnitude ``M / p_min``, if both are declared."""
        if self.M is None or self.p_min is None:
            return None
        return self.M / self.p_min

    @property
    def context_dim(self) -> Optional[int]:
        for obs in self.observations:
            return None if obs.x is None else len(obs.x)
        return None


def check_propensities(p: Sequence[float], K: int, p_min: Optional[float] = None, line=None) -> None:
    """Raise unless ``p`` is a length-``K`` probability vector with entries in (0, 1)."""
    if len(p) != K:
        raise DimensionMismatch(f"propensity vector has {len(p)} entries, expected K={K}", line=line)
    for w, pw in enumerate(p):
        if not (0.0 < pw < 1.0):
            raise PropensityViolation(f"propensity of arm {w} is {pw!r}, must lie strictly in (0, 1)", line=line)
        if p_min is not None and pw < p_min:
            raise PropensityViolation(f"propensity of arm {w} is {pw!r}, below declared p_min={p_min!r}", line=line)
    total = math.fsum(p)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise PropensityViolation(f"propensities sum to {total!r}, not 1", line=line)


def _check_observation(log_K, M, p_min, prev_t, ctx_dim, obs: Observation, line=None) -> None:
    if obs.t != prev_t + 1:
        raise OrderViolation(f"round t={obs.t} does not follow t={prev_t}", line=line)
    check_propensities(obs.p, log_K, p_min, line=line)
    if not (0 <= obs.a < log_K):
        raise DimensionMismatch(f"action {obs.a} outside 0..{log_K - 1}", line=line)
    if not math.isfinite(obs.y):
        raise SchemaError("y", line=line, detail="reward must be finite")
    if M is not None and abs(obs.y) > M:
        raise RewardBoundViolation(f"|reward| = {abs(obs.y)!r} exceeds declared M={M!r}", line=line)
    if ctx_dim is not None:
        got = None if obs.x is None else len(obs.x)
        if got != ctx_dim:
            raise DimensionMismatch(f"context has dimension {got}, log uses {ctx_dim}", line=line)


def append_observation(log: ObservationLog, obs: Observation) -> ObservationLog:
    """Return ``log`` extended by ``obs`` after checking every invariant."""
    prev_t = log.observations[-1].t if log.observations else 0
    ctx_dim = None
    if log.observations:
        ctx_dim = log.context_dim
        if ctx_dim is None and obs.x is not None:
            raise DimensionMismatch("context present but earlier rounds have none")
    _check_observation(log.K, log.M, log.p_min, prev_t, ctx_dim, obs)
    return replace(log, observations=log.observations + (obs,))


def _validated(K, M, p_min, numbered_rows):
    """Check ``(line, obs)`` pairs in order; return the observations as a tuple."""
    out = []
    ctx_dim = None
    for line, obs in numbered_rows:
        if not out:
            ctx_dim = None if obs.x is None else len(obs.x)
        elif (obs.x is None) != (ctx_dim is None):
            raise DimensionMismatch("context presence changes within the log", line=line)
        _check_observation(K, M, p_min, out[-1].t if out else 0, ctx_dim, obs, line=line)
        out.append(obs)
    return tuple(out)


def build_log(K: int, rows: Iterable[Observation], M=None, p_min=None, meta=None) -> ObservationLog:
    """Validate ``rows`` one by one and assemble a log (linear time)."""
    log = ObservationLog(K=K, M=M, p_min=p_min, meta=meta)
    return replace(log, observations=_validated(K, M, p_min, ((None, obs) for obs in rows)))


# --- serialization ---------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def serialize_log(log: ObservationLog) -> bytes:
    """Encode ``log`` as UTF-8 JSON lines, header first, each line LF-terminated."""
    header = {"K": log.K}
    if log.M is not None:
        header["M"] = float(log.M)
    if log.p_min is not None:
        header["p_min"] = float(log.p_min)
    if log.meta is not None:
        header["meta"] = log.meta
    lines = [_dumps(header)]
    for obs in log.observations:
        rec = {"t": obs.t, "p": list(obs.p), "a": obs.a, "y": obs.y}
        if obs.x is not None:
            rec["x"] = list(obs.x)
        lines.append(_dumps(rec))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _number(rec, key, line, kind=float, required=True):
    if key not in rec or rec[key] is None:
        if required:
            raise SchemaError(key, line=line)
        return None
    v = rec[key]
    if isinstance(v, bool):
        raise SchemaError(key, line=line, detail="boolean not allowed")
    if kind is int:
        if not isinstance(v, int):
            raise SchemaError(key, line=line, detail="expected an integer")
        return v
    if not isinstance(v, (int, float)):
        raise SchemaError(key, line=line, detail="expected a number")
    return float(v)


def _vector(rec, key, line, required=True):
    if key not in rec or rec[key] is None:
        if required:
            raise SchemaError(key, line=line)
        return None
    v = rec[key]
    if not isinstance(v, list) or not all(isinstance(e, (int, float)) and not isinstance(e, bool) for e in v):
        raise SchemaError(key, line=line, detail="expected a list of numbers")
    return tuple(float(e) for e in v)


def _load_line(raw: bytes, line: int) -> dict:
    try:
        rec = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc), line=line) from None
    if not isinstance(rec, dict):
        raise ParseError("expected a JSON object", line=line)
    return rec


def iter_records(data: bytes):
    """Yield ``(line_number, record)`` for every non-empty line."""
    for n, raw in enumerate(data.split(b"\n"), start=1):
        if raw.strip():
            yield n, _load_line(raw, n)


def parse_log(data: bytes) -> ObservationLog:
    """Decode a JSON-lines log; errors carry the 1-based line number."""
    records = iter_records(data)
    try:
        line, header = next(records)
    except StopIteration:
        raise ParseError("empty log: header line missing", line=1) from None
    K = _number(header, "K", line, kind=int)
    M = _number(header, "M", line, required=False)
    p_min = _number(header, "p_min", line, required=False)
    meta = header.get("meta")
    try:
        log = ObservationLog(K=K, M=M, p_min=p_min, meta=meta)
    except SchemaError as exc:
        raise SchemaError(exc.field, line=line) from None
    except DimensionMismatch as exc:
        raise DimensionMismatch(str(exc), line=line) from None

    def rows():
        for n, rec in records:
            yield n, Observation(
                t=_number(rec, "t", n, kind=int),
                p=_vector(rec, "p", n),
                a=_number(rec, "a", n, kind=int),
                y=_number(rec, "y", n),
                x=_vector(rec, "x", n, required=False),
            )

    return replace(log, observations=_validated(K, M, p_min, rows()))


def read_log(path) -> ObservationLog:
    with open(path, "rb") as fh:
        return parse_log(fh.read())


def write_log(log: ObservationLog, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_log(log))
