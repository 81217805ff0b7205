# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled cone-product projection kernel.

Mirrors the algorithm in rerm.cones / rerm.kernels; the pure-numpy path
is the reference.  Kind codes match rerm.cones.ConeKind.
"""

from libc.math cimport exp, sqrt, fabs, isfinite, INFINITY, NAN, e as EULER_E

cdef int K_ZERO = 0
cdef int K_NONNEG = 1
cdef int K_SOC = 2
cdef int K_EXP = 3
cdef int K_EXP_DUAL = 4
cdef int K_FREE = 5

cdef double SLACK = 1e-10
cdef double ROOT_TOL = 1e-12
cdef int MAXIT = 100


cdef inline double _max(double a, double b):
    return a if a > b else b


cdef bint _in_exp(double r, double s, double t) noexcept:
    cdef double scale = _max(1.0, _max(fabs(r), _max(fabs(s), fabs(t))))
    cdef double q
    if s > 0.0:
        q = r / s
        if q > 700.0:
            return False
        return t - s * exp(q) >= -SLACK * scale
    if fabs(s) <= SLACK * scale:
        return r <= SLACK * scale and t >= -SLACK * scale
    return False


cdef bint _in_exp_dual(double u, double v, double w) noexcept:
    cdef double scale = _max(1.0, _max(fabs(u), _max(fabs(v), fabs(w))))
    cdef double q
    if u < 0.0:
        q = v / u
        if q > 700.0:
            return False
        return EULER_E * w + u * exp(q) >= -SLACK * scale
    if fabs(u) <= SLACK * scale:
        return v >= -SLACK * scale and w >= -SLACK * scale
    return False


cdef inline double _exp_resid(double alpha, double r, double s, double t) noexcept:
    cdef double ex = exp(alpha)
    cdef double e2 = ex * ex
    return (r + t * ex) * (1.0 + e2 * (1.0 - alpha)) - \
        (s + t * ex * (1.0 - alpha)) * (alpha + e2)


cdef void _exp_point(double alpha, double r, double s, double t,
                     double* x, double* y, double* z) noexcept:
    cdef double ex = exp(alpha)
    cdef double den1 = alpha + ex * ex
    cdef double den2 = 1.0 + ex * ex * (1.0 - alpha)
    cdef double yy
    if fabs(den1) >= fabs(den2):
        yy = (r + t * ex) / den1 if den1 != 0.0 else NAN
    else:
        yy = (s + t * ex * (1.0 - alpha)) / den2 if den2 != 0.0 else NAN
    x[0] = alpha * yy
    y[0] = yy
    z[0] = yy * ex


cdef double _refine_root(double lo, double hi, double glo,
                         double r, double s, double t) noexcept:
    cdef double alpha = 0.5 * (lo + hi)
    cdef double g, h, dg, step
    cdef int it
    for it in range(MAXIT):
        g = _exp_resid(alpha, r, s, t)
        if g == 0.0 or hi - lo < ROOT_TOL * _max(1.0, fabs(alpha)):
            break
        if (g > 0.0) == (glo > 0.0):
            lo = alpha
        else:
            hi = alpha
        h = 1e-7 * _max(1.0, fabs(alpha))
        dg = (_exp_resid(alpha + h, r, s, t) - g) / h
        step = alpha - g / dg if dg != 0.0 else INFINITY
        if lo < step < hi:
            alpha = step
        else:
            alpha = 0.5 * (lo + hi)
    return alpha


cdef void _proj_exp(double r, double s, double t,
                    double* px, double* py, double* pz) noexcept:
    cdef double bx, by, bz, best_d, d, x, y, z
    cdef double lo_a, hi_a, step, gprev, aprev, a, g, alpha
    cdef int i, n_scan

    if _in_exp(r, s, t):
        px[0] = r; py[0] = s; pz[0] = t
        return
    if _in_exp_dual(-r, -s, -t):
        px[0] = 0.0; py[0] = 0.0; pz[0] = 0.0
        return
    if r <= 0.0 and s <= 0.0:
        px[0] = r; py[0] = 0.0; pz[0] = _max(t, 0.0)
        return

    bx = r if r < 0.0 else 0.0
    by = 0.0
    bz = _max(t, 0.0)
    best_d = (bx - r) ** 2 + (by - s) ** 2 + (bz - t) ** 2

    n_scan = 600
    lo_a = -30.0
    hi_a = 30.0
    step = (hi_a - lo_a) / n_scan
    gprev = _exp_resid(lo_a, r, s, t)
    aprev = lo_a
    for i in range(1, n_scan + 1):
        a = lo_a + i * step
        g = _exp_resid(a, r, s, t)
        if gprev == 0.0 or (gprev > 0.0) != (g > 0.0):
            alpha = _refine_root(aprev, a, gprev, r, s, t)
            _exp_point(alpha, r, s, t, &x, &y, &z)
            if isfinite(y) and y > 0.0 and y * exp(alpha) - t >= -1e-9:
                d = (x - r) ** 2 + (y - s) ** 2 + (z - t) ** 2
                if d < best_d:
                    bx = x; by = y; bz = z
                    best_d = d
        gprev = g
        aprev = a

    # Far-negative root: for s > 0 the residual is r - s*alpha + O(e^alpha),
    # so a root near alpha = r/s can sit far left of the scan window.
    if s > 0.0 and r / s < lo_a:
        a = r / s
        alpha = _refine_root(a - 1.0, a + 1.0, _exp_resid(a - 1.0, r, s, t), r, s, t)
        _exp_point(alpha, r, s, t, &x, &y, &z)
        if isfinite(y) and y > 0.0 and y * exp(alpha) - t >= -1e-9:
            d = (x - r) ** 2 + (y - s) ** 2 + (z - t) ** 2
            if d < best_d:
                bx = x; by = y; bz = z
    px[0] = bx; py[0] = by; pz[0] = bz


def project_product(double[::1] v, double[::1] out,
                    long[::1] kinds, long[::1] starts, long[::1] dims):
    """In-place projection of v onto the cone product described by the layout."""
    cdef Py_ssize_t nb = kinds.shape[0]
    cdef Py_ssize_t i, j, s, d
    cdef int kind
    cdef double t, nx, a, px, py, pz
    for i in range(nb):
        kind = <int> kinds[i]
        s = starts[i]
        d = dims[i]
        if kind == K_ZERO:
            for j in range(s, s + d):
                out[j] = 0.0
        elif kind == K_FREE:
            for j in range(s, s + d):
                out[j] = v[j]
        elif kind == K_NONNEG:
            for j in range(s, s + d):
                out[j] = v[j] if v[j] > 0.0 else 0.0
        elif kind == K_SOC:
            t = v[s]
            nx = 0.0
            for j in range(s + 1, s + d):
                nx += v[j] * v[j]
            nx = sqrt(nx)
            if nx <= t:
                for j in range(s, s + d):
                    out[j] = v[j]
            elif nx <= -t:
                for j in range(s, s + d):
                    out[j] = 0.0
            else:
                a = 0.5 * (t + nx)
                out[s] = a
                a = a / nx
                for j in range(s + 1, s + d):
                    out[j] = a * v[j]
        elif kind == K_EXP:
            _proj_exp(v[s], v[s + 1], v[s + 2], &px, &py, &pz)
            out[s] = px; out[s + 1] = py; out[s + 2] = pz
        else:  # dual exp via Moreau
            _proj_exp(-v[s], -v[s + 1], -v[s + 2], &px, &py, &pz)
            out[s] = v[s] + px
            out[s + 1] = v[s + 1] + py
            out[s + 2] = v[s + 2] + pz
