"""Numba-jitted implementations of the numeric kernels.

Same public surface as _kernels_numpy; scalar inner loops compiled with
@njit(cache=True).  These carry the hot paths: basis evaluation at many
parameters, the fitting-objective accumulation, foot-point refinement and
the two-loop recursion.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _find_span(knots, degree, t):
    n_basis = knots.shape[0] - degree - 1
    if t >= knots[n_basis]:
        return n_basis - 1
    if t <= knots[degree]:
        return degree
    lo = degree
    hi = n_basis
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if t < knots[mid]:
            hi = mid
        else:
            lo = mid
    return lo


@njit(cache=True)
def _basis(knots, degree, span, t, out):
    # NURBS-book A2.2
    left = np.empty(degree + 1)
    right = np.empty(degree + 1)
    out[0] = 1.0
    for j in range(1, degree + 1):
        left[j] = t - knots[span + 1 - j]
        right[j] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            temp = out[r] / (right[r + 1] + left[j - r])
            out[r] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        out[j] = saved


@njit(cache=True)
def _ders(knots, degree, span, t, nd, out):
    # NURBS-book A2.3; out is (3, degree+1), rows beyond nd stay zero
    p = degree
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    ndu = np.empty((p + 1, p + 1))
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = t - knots[span + 1 - j]
        right[j] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    out[:] = 0.0
    for j in range(p + 1):
        out[0, j] = ndu[j, p]
    n_eff = min(nd, p)
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1 = 0
        s2 = 1
        a[:] = 0.0
        a[0, 0] = 1.0
        for k in range(1, n_eff + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            out[k, r] = d
            s1, s2 = s2, s1

    fac = float(p)
    for k in range(1, n_eff + 1):
        for j in range(p + 1):
            out[k, j] *= fac
        fac *= p - k


@njit(cache=True)
def eval_basis_many(knots, degree, ts):
    N = ts.shape[0]
    p = degree
    spans = np.empty(N, dtype=np.int64)
    B = np.empty((N, p + 1))
    B1 = np.empty((N, p + 1))
    B2 = np.empty((N, p + 1))
    d = np.empty((3, p + 1))
    for k in range(N):
        span = _find_span(knots, p, ts[k])
        spans[k] = span
        _ders(knots, p, span, ts[k], 2, d)
        for j in range(p + 1):
            B[k, j] = d[0, j]
            B1[k, j] = d[1, j]
            B2[k, j] = d[2, j]
    return spans, B, B1, B2


@njit(cache=True)
def curve_points(knots, degree, ctrl, ts):
    N = ts.shape[0]
    p = degree
    n = ctrl.shape[0]
    pts = np.zeros((N, 2))
    b = np.empty(p + 1)
    for k in range(N):
        span = _find_span(knots, p, ts[k])
        _basis(knots, p, span, ts[k], b)
        for j in range(p + 1):
            i = (span - p + j) % n
            pts[k, 0] += b[j] * ctrl[i, 0]
            pts[k, 1] += b[j] * ctrl[i, 1]
    return pts


@njit(cache=True)
def curve_jets(knots, degree, ctrl, ts):
    N = ts.shape[0]
    p = degree
    n = ctrl.shape[0]
    pts = np.zeros((N, 2))
    d1 = np.zeros((N, 2))
    d2 = np.zeros((N, 2))
    d = np.empty((3, p + 1))
    for k in range(N):
        span = _find_span(knots, p, ts[k])
        _ders(knots, p, span, ts[k], 2, d)
        for j in range(p + 1):
            i = (span - p + j) % n
            pts[k, 0] += d[0, j] * ctrl[i, 0]
            pts[k, 1] += d[0, j] * ctrl[i, 1]
            d1[k, 0] += d[1, j] * ctrl[i, 0]
            d1[k, 1] += d[1, j] * ctrl[i, 1]
            d2[k, 0] += d[2, j] * ctrl[i, 0]
            d2[k, 1] += d[2, j] * ctrl[i, 1]
    return pts, d1, d2


@njit(cache=True)
def objective_core(knots, degree, ctrl, ts, X):
    N = ts.shape[0]
    p = degree
    n = ctrl.shape[0]
    f = 0.0
    gcp = np.zeros((n, 2))
    gt = np.empty(N)
    d = np.empty((3, p + 1))
    for k in range(N):
        span = _find_span(knots, p, ts[k])
        _ders(knots, p, span, ts[k], 1, d)
        px = 0.0
        py = 0.0
        dx = 0.0
        dy = 0.0
        for j in range(p + 1):
            i = (span - p + j) % n
            px += d[0, j] * ctrl[i, 0]
            py += d[0, j] * ctrl[i, 1]
            dx += d[1, j] * ctrl[i, 0]
            dy += d[1, j] * ctrl[i, 1]
        rx = px - X[k, 0]
        ry = py - X[k, 1]
        f += 0.5 * (rx * rx + ry * ry)
        gt[k] = rx * dx + ry * dy
        for j in range(p + 1):
            i = (span - p + j) % n
            gcp[i, 0] += d[0, j] * rx
            gcp[i, 1] += d[0, j] * ry
    return f, gcp, gt


@njit(cache=True)
def nearest_sample_index(samples, X):
    N = X.shape[0]
    S = samples.shape[0]
    out = np.empty(N, dtype=np.int64)
    for k in range(N):
        best = 0
        dx = X[k, 0] - samples[0, 0]
        dy = X[k, 1] - samples[0, 1]
        bd = dx * dx + dy * dy
        for s in range(1, S):
            dx = X[k, 0] - samples[s, 0]
            dy = X[k, 1] - samples[s, 1]
            d2 = dx * dx + dy * dy
            if d2 < bd:
                bd = d2
                best = s
        out[k] = best
    return out


@njit(cache=True)
def _wrap(t, closed):
    if closed:
        return t % 1.0
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


@njit(cache=True)
def _point(knots, degree, ctrl, t, b):
    span = _find_span(knots, degree, t)
    _basis(knots, degree, span, t, b)
    n = ctrl.shape[0]
    px = 0.0
    py = 0.0
    for j in range(degree + 1):
        i = (span - degree + j) % n
        px += b[j] * ctrl[i, 0]
        py += b[j] * ctrl[i, 1]
    return px, py


@njit(cache=True)
def _jet1(knots, degree, ctrl, t, d):
    span = _find_span(knots, degree, t)
    _ders(knots, degree, span, t, 1, d)
    n = ctrl.shape[0]
    px = 0.0
    py = 0.0
    dx = 0.0
    dy = 0.0
    for j in range(degree + 1):
        i = (span - degree + j) % n
        px += d[0, j] * ctrl[i, 0]
        py += d[0, j] * ctrl[i, 1]
        dx += d[1, j] * ctrl[i, 0]
        dy += d[1, j] * ctrl[i, 1]
    return px, py, dx, dy


@njit(cache=True)
def _golden(knots, degree, ctrl, xx, xy, lo, hi, b):
    invphi = 0.6180339887498949
    a = lo
    bb = hi
    c = bb - invphi * (bb - a)
    dd = a + invphi * (bb - a)
    px, py = _point(knots, degree, ctrl, c, b)
    fc = (px - xx) ** 2 + (py - xy) ** 2
    px, py = _point(knots, degree, ctrl, dd, b)
    fd = (px - xx) ** 2 + (py - xy) ** 2
    for _ in range(100):
        if fc < fd:
            bb = dd
            dd = c
            fd = fc
            c = bb - invphi * (bb - a)
            px, py = _point(knots, degree, ctrl, c, b)
            fc = (px - xx) ** 2 + (py - xy) ** 2
        else:
            a = c
            c = dd
            fc = fd
            dd = a + invphi * (bb - a)
            px, py = _point(knots, degree, ctrl, dd, b)
            fd = (px - xx) ** 2 + (py - xy) ** 2
    return (a + bb) / 2.0


@njit(cache=True)
def refine_footpoints(knots, degree, ctrl, X, t0, closed, tol, max_iter):
    N = X.shape[0]
    out = np.empty(N)
    resid = np.empty(N)
    ok = np.zeros(N, dtype=np.bool_)
    b = np.empty(degree + 1)
    d = np.empty((3, degree + 1))
    for k in range(N):
        xx = X[k, 0]
        xy = X[k, 1]
        t = _wrap(t0[k], closed)
        px, py, dx, dy = _jet1(knots, degree, ctrl, t, d)
        rx = xx - px
        ry = xy - py
        dist = np.sqrt(rx * rx + ry * ry)
        g = rx * dx + ry * dy
        for _ in range(max_iter):
            if abs(g) < tol:
                break
            n2 = dx * dx + dy * dy
            if n2 < 1e-28:
                span = _find_span(knots, degree, t)
                t = _golden(knots, degree, ctrl, xx, xy, knots[span], knots[span + 1], b)
                px, py, dx, dy = _jet1(knots, degree, ctrl, t, d)
                rx = xx - px
                ry = xy - py
                dist = np.sqrt(rx * rx + ry * ry)
                g = rx * dx + ry * dy
                continue
            dt = g / n2
            a = 1.0
            moved = False
            tn = t
            dn = dist
            for _ in range(31):
                tn = _wrap(t + a * dt, closed)
                pnx, pny = _point(knots, degree, ctrl, tn, b)
                dn = np.sqrt((xx - pnx) ** 2 + (xy - pny) ** 2)
                if dn < dist:
                    moved = True
                    break
                a *= 0.5
            if moved:
                # keep walking down the halving ladder while it improves, so
                # an overshooting step cannot settle into a symmetric
                # ping-pong
                while True:
                    a *= 0.5
                    tn2 = _wrap(t + a * dt, closed)
                    pn2x, pn2y = _point(knots, degree, ctrl, tn2, b)
                    dn2 = np.sqrt((xx - pn2x) ** 2 + (xy - pn2y) ** 2)
                    if dn2 < dn:
                        tn = tn2
                        dn = dn2
                    else:
                        break
                t = tn
                dist = dn
            if not moved:
                # distance decrease below float resolution; polish the
                # orthogonality defect while the distance cannot grow
                tn = _wrap(t + dt, closed)
                pnx, pny, dnx, dny = _jet1(knots, degree, ctrl, tn, d)
                rnx = xx - pnx
                rny = xy - pny
                gn = rnx * dnx + rny * dny
                dn = np.sqrt(rnx * rnx + rny * rny)
                if abs(gn) < abs(g) and dn <= dist * (1.0 + 1e-12):
                    t = tn
                    dist = dn
                    g = gn
                    dx = dnx
                    dy = dny
                    continue
                break
            px, py, dx, dy = _jet1(knots, degree, ctrl, t, d)
            rx = xx - px
            ry = xy - py
            g = rx * dx + ry * dy
        out[k] = t
        resid[k] = abs(g)
        ok[k] = abs(g) < tol
    return out, resid, ok


@njit(cache=True)
def two_loop(grad, S, Y, rho, gamma):
    k = S.shape[0]
    q = grad.copy()
    alpha = np.empty(k)
    for i in range(k - 1, -1, -1):
        a = rho[i] * np.dot(S[i], q)
        alpha[i] = a
        for j in range(q.shape[0]):
            q[j] -= a * Y[i, j]
    z = gamma * q
    for i in range(k):
        beta = rho[i] * np.dot(Y[i], z)
        c = alpha[i] - beta
        for j in range(z.shape[0]):
            z[j] += c * S[i, j]
    return z
