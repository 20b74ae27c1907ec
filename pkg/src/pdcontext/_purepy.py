"""Pure-Python RK4 loop; fallback for the compiled ``_kernels`` module.

``rk4_integrate(code, x0, params, scale, step, max_steps, conv_tol, clip_tol, full_form)``
returns ``(points, status)`` where ``points`` has one row per accepted state
(the start included) and ``status`` is one of the module constants.

Field codes and their ``params``:

* ``REDUCED3``: ``(a, b, c, f)``; the (a, b, c, f) polynomial in (x1, x2).
* ``REDUCED4``: ``(beta, z)``; the four-strategy system in (x1, x2, x3),
  without its ``1/(1-beta)`` prefactor.
* ``GENERAL``: row-major n*n payoff matrix; full-form replicator field.

Every field is multiplied by ``scale`` before use.

Integration continues after a share is clamped to zero (faces are invariant);
``ABSORBED`` is reported only when the step budget runs out and some share
that started positive has been driven to exactly zero.
"""

import math

import numpy as np

REDUCED3, REDUCED4, GENERAL = 0, 1, 2
MAX_STEPS_DONE, CONVERGED, ABSORBED = 0, 1, 2
NONFINITE, LEFT_SIMPLEX = -1, -2


def _reduced3(x, prm, n, scale):
    x1, x2 = x
    a, b, c, f = prm
    common = c * x1 * x1 + (f + c - a) * x1 * x2 + (f - b) * x2 * x2
    return [
        scale * x1 * (common - c * x1 - f * x2),
        scale * x2 * (common + (a - c) * x1 + (b - f) * x2),
    ]


def _reduced4(x, prm, n, scale):
    x1, x2, x3 = x
    beta, z = prm
    gam = 1.0 - beta
    u = x1 + x3
    w = gam * x1 + x3
    g1 = u * (1.0 - u) * (3.0 - z) + (2.0 * z - 5.0) * w * x2 + ((z - 1.0) * x2 - gam * z) * x2
    g2 = u * u * (z - 3.0) + ((5.0 - z) + (2.0 * z - 5.0) * x2) * w + (1.0 - z) * (1.0 - x2) * x2
    return [scale * x1 * g1, scale * x2 * g2, scale * x3 * (g1 - beta * z * x2)]


def _general(x, prm, n, scale):
    mx = [sum(prm[i * n + j] * x[j] for j in range(n)) for i in range(n)]
    avg = sum(xi * mi for xi, mi in zip(x, mx))
    return [scale * xi * (mi - avg) for xi, mi in zip(x, mx)]


_FIELDS = {REDUCED3: _reduced3, REDUCED4: _reduced4, GENERAL: _general}


def rk4_integrate(code, x0, params, scale, step, max_steps, conv_tol, clip_tol, full_form):
    field = _FIELDS[code]
    prm = [float(v) for v in np.ravel(params)]
    start = [float(v) for v in x0]
    n = len(start)
    tot0 = 0.0
    for v in start:
        tot0 += v  # plain left-to-right sum, as in the compiled kernel
    start_resid = 1.0 - tot0
    h, hh, h6 = step, 0.5 * step, step / 6.0
    x = list(start)
    pts = [x]
    status = MAX_STEPS_DONE
    absorbed = False
    for _ in range(max_steps):
        k1 = field(x, prm, n, scale)
        if max(abs(v) for v in k1) < conv_tol:
            status = CONVERGED
            break
        k2 = field([xi + hh * ki for xi, ki in zip(x, k1)], prm, n, scale)
        k3 = field([xi + hh * ki for xi, ki in zip(x, k2)], prm, n, scale)
        k4 = field([xi + h * ki for xi, ki in zip(x, k3)], prm, n, scale)
        xn = [xi + h6 * (a + 2.0 * b + 2.0 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4)]
        tot = 0.0
        for j, v in enumerate(xn):
            if not math.isfinite(v):
                status = NONFINITE
                break
            if v < 0.0:
                if v > -clip_tol:
                    xn[j] = 0.0
                else:
                    status = LEFT_SIMPLEX
                    break
            tot += xn[j]
        if status < 0:
            break
        if full_form:
            xn = [v / tot for v in xn]
        elif tot > 1.0:
            if tot - 1.0 < clip_tol:
                xn = [v / tot for v in xn]
            else:
                status = LEFT_SIMPLEX
                break
        pts.append(xn)
        x = xn
        if any(s > 0.0 and v == 0.0 for s, v in zip(start, xn)):
            absorbed = True
        if not full_form and start_resid > 0.0 and tot >= 1.0:
            absorbed = True
    if status == MAX_STEPS_DONE and absorbed:
        status = ABSORBED
    return np.array(pts, dtype=float).reshape(-1, n), status
