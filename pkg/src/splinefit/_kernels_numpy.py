"""Pure-numpy implementations of the numeric kernels.

This is the fallback path used when numba is unavailable or when
SPLINEFIT_BACKEND=numpy.  Array-valued entry points are vectorized over the
evaluation parameters; the per-point foot-point refinement loops in Python.

All kernels operate on plain arrays.  Control-point indices are taken modulo
the number of control points, which makes closed (periodic) curves and open
clamped curves share one code path: for open curves the active indices never
exceed n-1, so the modulo is the identity.
"""

import numpy as np


def find_spans(knots, degree, ts):
    """Knot-span index for each parameter value (vectorized)."""
    n_basis = knots.shape[0] - degree - 1
    spans = np.searchsorted(knots, ts, side="right") - 1
    return np.clip(spans, degree, n_basis - 1).astype(np.int64)


def basis_and_derivatives(knots, degree, ts):
    """Active basis values plus first and second derivatives at each t.

    Returns (spans, B, B1, B2) with shapes (N,), (N, p+1), (N, p+1), (N, p+1).
    Implements the triangular Cox-de Boor scheme with derivative back
    substitution (NURBS-book A2.3), vectorized with the point index as the
    trailing axis.  For degree 1 the second-derivative rows are zero.
    """
    ts = np.asarray(ts, dtype=np.float64)
    p = degree
    N = ts.shape[0]
    spans = find_spans(knots, p, ts)

    left = np.zeros((p + 1, N))
    right = np.zeros((p + 1, N))
    ndu = np.zeros((p + 1, p + 1, N))
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = ts - knots[spans + 1 - j]
        right[j] = knots[spans + j] - ts
        saved = np.zeros(N)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    nd = min(2, p)
    ders = np.zeros((3, p + 1, N))
    for j in range(p + 1):
        ders[0, j] = ndu[j, p]

    a = np.zeros((2, p + 1, N))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:] = 0.0
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = np.zeros(N)
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d = d + a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d = d + a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    fac = float(p)
    for k in range(1, nd + 1):
        ders[k] *= fac
        fac *= p - k

    B = np.ascontiguousarray(ders[0].T)
    B1 = np.ascontiguousarray(ders[1].T)
    B2 = np.ascontiguousarray(ders[2].T)
    return spans, B, B1, B2


def eval_basis_many(knots, degree, ts):
    return basis_and_derivatives(knots, degree, ts)


def active_indices(spans, degree, n_ctrl):
    offs = np.arange(degree + 1, dtype=np.int64)
    return (spans[:, None] - degree + offs[None, :]) % n_ctrl


def curve_points(knots, degree, ctrl, ts):
    spans, B, _, _ = basis_and_derivatives(knots, degree, ts)
    idx = active_indices(spans, degree, ctrl.shape[0])
    return np.einsum("kj,kjd->kd", B, ctrl[idx])


def curve_jets(knots, degree, ctrl, ts):
    spans, B, B1, B2 = basis_and_derivatives(knots, degree, ts)
    idx = active_indices(spans, degree, ctrl.shape[0])
    cp = ctrl[idx]
    pts = np.einsum("kj,kjd->kd", B, cp)
    d1 = np.einsum("kj,kjd->kd", B1, cp)
    d2 = np.einsum("kj,kjd->kd", B2, cp)
    return pts, d1, d2


def objective_core(knots, degree, ctrl, ts, X):
    """Data term of the fitting objective and its raw gradients.

    Returns (f_data, grad_ctrl (n,2), grad_t (N,)) where
    f_data = 0.5 * sum_k ||P(t_k) - X_k||^2.
    """
    spans, B, B1, _ = basis_and_derivatives(knots, degree, ts)
    n = ctrl.shape[0]
    idx = active_indices(spans, degree, n)
    cp = ctrl[idx]
    pts = np.einsum("kj,kjd->kd", B, cp)
    d1 = np.einsum("kj,kjd->kd", B1, cp)
    r = pts - X
    f = 0.5 * float(np.sum(r * r))
    gt = np.sum(r * d1, axis=1)
    gcp = np.zeros_like(ctrl)
    np.add.at(gcp, idx.ravel(), (B[:, :, None] * r[:, None, :]).reshape(-1, 2))
    return f, gcp, gt


def nearest_sample_index(samples, X):
    """Index of the nearest sample for each query point, lowest index on ties."""
    N = X.shape[0]
    out = np.empty(N, dtype=np.int64)
    # chunked to bound the (chunk x S) distance matrix
    chunk = max(1, int(4_000_000 // max(1, samples.shape[0])))
    for a in range(0, N, chunk):
        b = min(N, a + chunk)
        diff = X[a:b, None, :] - samples[None, :, :]
        d2 = np.einsum("ksd,ksd->ks", diff, diff)
        out[a:b] = np.argmin(d2, axis=1)
    return out


def _wrap_scalar(t, closed):
    if closed:
        return t % 1.0
    return min(max(t, 0.0), 1.0)


def _point_at(knots, degree, ctrl, t):
    return curve_points(knots, degree, ctrl, np.array([t]))[0]


def _jet1_at(knots, degree, ctrl, t):
    spans, B, B1, _ = basis_and_derivatives(knots, degree, np.array([t]))
    idx = active_indices(spans, degree, ctrl.shape[0])[0]
    cp = ctrl[idx]
    return B[0] @ cp, B1[0] @ cp


def _golden_section(knots, degree, ctrl, x, lo, hi, iters=100):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = np.sum((_point_at(knots, degree, ctrl, c) - x) ** 2)
    fd = np.sum((_point_at(knots, degree, ctrl, d) - x) ** 2)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = np.sum((_point_at(knots, degree, ctrl, c) - x) ** 2)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = np.sum((_point_at(knots, degree, ctrl, d) - x) ** 2)
    return (a + b) / 2.0


def _refine_one(knots, degree, ctrl, x, t0, closed, tol, max_iter):
    t = _wrap_scalar(t0, closed)
    pt, d1 = _jet1_at(knots, degree, ctrl, t)
    r = x - pt
    dist = np.hypot(r[0], r[1])
    g = r @ d1
    for _ in range(max_iter):
        if abs(g) < tol:
            return t, abs(g), True
        n2 = d1 @ d1
        if n2 < 1e-28:
            span = int(find_spans(knots, degree, np.array([t]))[0])
            t = _golden_section(knots, degree, ctrl, x, knots[span], knots[span + 1])
            pt, d1 = _jet1_at(knots, degree, ctrl, t)
            r = x - pt
            dist = np.hypot(r[0], r[1])
            g = r @ d1
            continue
        dt = g / n2
        a = 1.0
        moved = False
        for _ in range(31):
            tn = _wrap_scalar(t + a * dt, closed)
            ptn = _point_at(knots, degree, ctrl, tn)
            dn = np.hypot(x[0] - ptn[0], x[1] - ptn[1])
            if dn < dist:
                moved = True
                break
            a *= 0.5
        if moved:
            # keep walking down the halving ladder while it improves, so an
            # overshooting step cannot settle into a symmetric ping-pong
            while True:
                a *= 0.5
                tn2 = _wrap_scalar(t + a * dt, closed)
                ptn2 = _point_at(knots, degree, ctrl, tn2)
                dn2 = np.hypot(x[0] - ptn2[0], x[1] - ptn2[1])
                if dn2 < dn:
                    tn, dn = tn2, dn2
                else:
                    break
            t = tn
            dist = dn
        if not moved:
            # the distance decrease has dropped below float resolution; keep
            # polishing the orthogonality defect as long as it shrinks and the
            # distance cannot meaningfully grow
            tn = _wrap_scalar(t + dt, closed)
            ptn, d1n = _jet1_at(knots, degree, ctrl, tn)
            rn = x - ptn
            gn = rn @ d1n
            dn = np.hypot(rn[0], rn[1])
            if abs(gn) < abs(g) and dn <= dist * (1.0 + 1e-12):
                t = tn
                dist = dn
                g = gn
                d1 = d1n
                continue
            break
        pt, d1 = _jet1_at(knots, degree, ctrl, t)
        r = x - pt
        g = r @ d1
    return t, abs(g), abs(g) < tol


def refine_footpoints(knots, degree, ctrl, X, t0, closed, tol, max_iter):
    """Gauss-Newton foot-point refinement with a distance-decrease line search.

    Returns (t, residual, converged) arrays; residual is the final
    orthogonality defect |(X - P(t)) . P'(t)|.
    """
    N = X.shape[0]
    out = np.empty(N)
    resid = np.empty(N)
    ok = np.zeros(N, dtype=np.bool_)
    for k in range(N):
        out[k], resid[k], ok[k] = _refine_one(
            knots, degree, ctrl, X[k], t0[k], closed, tol, max_iter
        )
    return out, resid, ok


def two_loop(grad, S, Y, rho, gamma):
    """H_k . grad via the two-loop recursion; pairs ordered oldest to newest."""
    k = S.shape[0]
    q = grad.astype(np.float64).copy()
    alpha = np.empty(k)
    for i in range(k - 1, -1, -1):
        alpha[i] = rho[i] * np.dot(S[i], q)
        q -= alpha[i] * Y[i]
    z = gamma * q
    for i in range(k):
        beta = rho[i] * np.dot(Y[i], z)
        z += S[i] * (alpha[i] - beta)
    return z
