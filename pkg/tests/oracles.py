"""Independent reference computations shared by the tests.

Nothing here imports the estimators under test: the enumeration oracle
recomputes every expectation from the definitions.
"""
import itertools
import math

# Three fixed two-arm potential-outcome tables (rows are rounds, columns arms).
TABLES = (
    ((1.0, 0.0), (0.0, 2.0), (3.0, -1.0)),
    ((0.5, 0.5), (-2.0, 1.5), (1.0, 4.0)),
    ((2.0, -3.0), (0.25, 0.75), (-1.0, -1.0)),
)


def adaptive_p1(table_id, history):
    """Propensity of arm 1 given past ``(action, reward)`` pairs.

    Each table uses a different history-dependent rule so the enumeration
    exercises genuinely adaptive designs.
    """
    t = len(history) + 1
    if table_id == 0:
        return (0.5, 0.3, 0.8)[t - 1] if not history else (0.3 if history[-1][0] == 1 else 0.7)
    if table_id == 1:
        s = sum(y for a, y in history if a == 1)
        return 0.2 + 0.6 / (1.0 + math.exp(-s))
    return (0.45, 0.6, 0.25)[t - 1] + (0.1 if history and history[0][0] == 0 else 0.0)


def enumerate_paths(table, p1_rule, T):
    """Yield ``(prob, actions, rewards, propensities)`` for every action sequence."""
    for actions in itertools.product((0, 1), repeat=T):
        prob = 1.0
        hist = []
        probs = []
        for t, a in enumerate(actions):
            p1 = p1_rule(hist)
            p = (1.0 - p1, p1)
            probs.append(p)
            prob *= p[a]
            hist.append((a, table[t][a]))
        yield prob, actions, [table[t][a] for t, a in enumerate(actions)], probs


def ipw(a, y, p, w):
    return y / p[w] if a == w else 0.0


def ci_z(alpha):
    """Two-sided normal quantile by bisection on erfc (independent of the package)."""
    lo, hi = 0.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.erfc(mid / math.sqrt(2.0)) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
