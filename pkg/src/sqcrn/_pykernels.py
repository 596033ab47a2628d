"""Pure-Python SSA kernels. Same arithmetic, in the same order, as ``_ckernels.pyx``."""

import math

HORIZON = 0
ABSORBED = 1
NEED_MORE = 2


def _props(x, reactants, rates, out):
    total = 0.0
    for j, row in enumerate(reactants):
        a = rates[j]
        for xi, r in zip(x, row):
            if r:
                if xi < r:
                    a = 0.0
                    break
                b = 1.0
                for q in range(r):
                    b = b * float(xi - q) / float(q + 1)
                a = a * b
        out[j] = a
        total += a
    return total


def _pick(props, target):
    acc = 0.0
    k = len(props) - 1
    for j, p in enumerate(props):
        acc += p
        if target < acc and p > 0.0:
            k = j
            break
    while props[k] <= 0.0:
        k -= 1
    return k


def propensities(x, reactants, rates, out):
    values = [0.0] * len(rates)
    total = _props(list(x), reactants.tolist(), list(rates), values)
    for j, v in enumerate(values):
        out[j] = v
    return total


def ssa_advance(x, t, horizon, reactants, change, rates, uniforms, times_out, states_out):
    """Run the direct method from ``(x, t)`` until ``horizon``, absorption or exhausted buffers.

    ``x`` is updated in place. Each jump writes its time and post-jump state to the
    output buffers. Returns ``(t, steps, consumed, status)``.
    """
    xs = [int(v) for v in x]
    reac = reactants.tolist()
    chg = change.tolist()
    k_rates = [float(v) for v in rates]
    u = uniforms.tolist()
    props = [0.0] * len(k_rates)
    capacity = times_out.shape[0]
    steps = 0
    used = 0
    status = HORIZON
    while True:
        a0 = _props(xs, reac, k_rates, props)
        if a0 <= 0.0:
            status = ABSORBED
            break
        if used + 2 > len(u) or steps >= capacity:
            status = NEED_MORE
            break
        u1 = u[used]
        u2 = u[used + 1]
        used += 2
        t_next = t - math.log(1.0 - u1) / a0
        if t_next > horizon:
            status = HORIZON
            break
        k = _pick(props, u2 * a0)
        xs = [a + d for a, d in zip(xs, chg[k])]
        t = t_next
        times_out[steps] = t
        states_out[steps, :] = xs
        steps += 1
    x[:] = xs
    return t, steps, used, status


def ssa_final(x, t, horizon, reactants, change, rates, uniforms):
    """Like :func:`ssa_advance` but without recording the path."""
    xs = [int(v) for v in x]
    reac = reactants.tolist()
    chg = change.tolist()
    k_rates = [float(v) for v in rates]
    u = uniforms.tolist()
    props = [0.0] * len(k_rates)
    used = 0
    while True:
        a0 = _props(xs, reac, k_rates, props)
        if a0 <= 0.0:
            status = ABSORBED
            break
        if used + 2 > len(u):
            status = NEED_MORE
            break
        u1 = u[used]
        u2 = u[used + 1]
        used += 2
        t_next = t - math.log(1.0 - u1) / a0
        if t_next > horizon:
            status = HORIZON
            break
        k = _pick(props, u2 * a0)
        xs = [a + d for a, d in zip(xs, chg[k])]
        t = t_next
    x[:] = xs
    return t, used, status
