"""Pure-Python reference kernels.

These are the sequential inner loops of the simulator.  ``_kernels.pyx``
implements the same functions with identical floating-point operation order,
so both backends return bit-identical arrays; the test suite checks this.
"""
import numpy as np

UNIFORM = 0
MEAN_PROPORTIONAL = 1


def compensated_cumsum(values):
    """Prefix sums with Neumaier compensation."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    out = np.empty_like(v)
    s = 0.0
    c = 0.0
    for i, x in enumerate(v.tolist()):
        tt = s + x
        if abs(s) >= abs(x):
            c += (s - tt) + x
        else:
            c += (x - tt) + s
        s = tt
        out[i] = s + c
    return out


def waterfill(p, p_floor):
    """Raise entries below ``p_floor`` to the floor, rescaling the others to keep the total at 1."""
    K = len(p)
    fixed = [False] * K
    n_fixed = 0
    while True:
        changed = False
        for k in range(K):
            if not fixed[k] and p[k] < p_floor:
                fixed[k] = True
                p[k] = p_floor
                n_fixed += 1
                changed = True
        if not changed:
            return p
        free = 1.0 - n_fixed * p_floor
        tot = 0.0
        for k in range(K):
            if not fixed[k]:
                tot += p[k]
        for k in range(K):
            if not fixed[k]:
                p[k] = p[k] * free / tot


def mean_proportional_probs(sums, counts, p_floor, mean_floor):
    """Sample means floored, normalized, then floored again at ``p_floor``.

    ``mean_floor < 0`` selects the adaptive floor ``0.05 * max(1, max_w |mean_w|)``.
    Arms never pulled count as having mean 0.
    """
    K = len(sums)
    means = [sums[k] / counts[k] if counts[k] > 0 else 0.0 for k in range(K)]
    if mean_floor < 0.0:
        scale = 1.0
        for v in means:
            if abs(v) > scale:
                scale = abs(v)
        mean_floor = 0.05 * scale
    q = [v if v > mean_floor else mean_floor for v in means]
    total = 0.0
    for v in q:
        total += v
    p = [v / total for v in q]
    return waterfill(p, p_floor)


def sample_index(p, u):
    """Categorical draw by inversion of the running cumulative sum."""
    c = 0.0
    for k in range(len(p)):
        c += p[k]
        if u < c:
            return k
    return len(p) - 1


def policy_path(potentials, uniforms, n_explore, p_floor, mean_floor, kind):
    """Run a policy over pre-drawn potential outcomes.

    Returns ``(actions, probs)``; ``probs[i]`` is exactly the vector used to
    draw ``actions[i]``.
    """
    pot = np.ascontiguousarray(potentials, dtype=np.float64)
    n, K = pot.shape
    u = np.ascontiguousarray(uniforms, dtype=np.float64).tolist()
    rows = pot.tolist()
    actions = np.empty(n, dtype=np.int64)
    probs = np.empty((n, K), dtype=np.float64)
    sums = [0.0] * K
    counts = [0] * K
    uniform = [1.0 / K] * K
    for i in range(n):
        if kind == UNIFORM or i + 1 <= n_explore:
            p = uniform
        else:
            p = mean_proportional_probs(sums, counts, p_floor, mean_floor)
        a = sample_index(p, u[i])
        y = rows[i][a]
        sums[a] += y
        counts[a] += 1
        actions[i] = a
        probs[i] = p
    return actions, probs


def ar1_filter(innovations, rho):
    """``y[i] = rho * y[i-1] + innovations[i]`` with ``y[-1] = 0``."""
    e = np.ascontiguousarray(innovations, dtype=np.float64)
    out = np.empty_like(e)
    prev = 0.0
    for i, v in enumerate(e.tolist()):
        prev = rho * prev + v
        out[i] = prev
    return out


def ls_predictions(x, y, clamp_mult):
    """Past-only least-squares predictions of ``y[i]`` from scalar ``x[i]``.

    The fit at round i uses rounds ``< i`` only (Welford co-moments), and the
    prediction is clamped to ``clamp_mult`` times the largest |y| seen so far.
    """
    xs = np.ascontiguousarray(x, dtype=np.float64).tolist()
    ys = np.ascontiguousarray(y, dtype=np.float64).tolist()
    out = np.empty(len(xs), dtype=np.float64)
    n = 0
    mx = my = cxx = cxy = 0.0
    ymax = 0.0
    for i in range(len(xs)):
        xi = xs[i]
        out[i] = _predict(n, mx, my, cxx, cxy, ymax * clamp_mult, xi)
        yi = ys[i]
        n += 1
        dx = xi - mx
        mx += dx / n
        my += (yi - my) / n
        cxx += dx * (xi - mx)
        cxy += dx * (yi - my)
        if abs(yi) > ymax:
            ymax = abs(yi)
    return out


VAR_TOL = 1e-12


def _predict(n, mx, my, cxx, cxy, bound, xi):
    if n == 0:
        return 0.0
    var = cxx / n
    pred = my
    if var > VAR_TOL * (1.0 + var):
        pred = my + (cxy / cxx) * (xi - mx)
    if pred > bound:
        return bound
    if pred < -bound:
        return -bound
    return pred
