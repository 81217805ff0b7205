"""Cones, their duals, and Euclidean projections.

The cone kinds are the ones every canonicalized program in this package
uses: the zero cone, the nonnegative orthant, second-order cones and the
exponential cone.  The free cone and the dual exponential cone exist so
that ``dual_cone`` is a genuine involution; constraint rows of programs
built by this package only ever use the first four kinds.

Sign conventions:
  * second-order cone of dimension k: {(t, x) in R^k : ||x||_2 <= t}
  * exponential cone: cl{(x, y, z) : y > 0, y*exp(x/y) <= z}
  * dual exponential cone: cl{(u, v, w) : u < 0, -u*exp(v/u) <= e*w}
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConeKind",
    "Cone",
    "dual_cone",
    "project",
    "check_membership",
    "cone_layout",
]


class ConeKind(enum.IntEnum):
    ZERO = 0
    NONNEG = 1
    SOC = 2
    EXP = 3
    EXP_DUAL = 4
    FREE = 5


@dataclass(frozen=True)
class Cone:
    kind: ConeKind
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"cone dimension must be positive, got {self.dim}")
        if self.kind == ConeKind.SOC and self.dim < 2:
            raise ValueError("second-order cone needs dimension >= 2")
        if self.kind in (ConeKind.EXP, ConeKind.EXP_DUAL) and self.dim != 3:
            raise ValueError("exponential cones have dimension exactly 3")

    @staticmethod
    def zero(n):
        return Cone(ConeKind.ZERO, n)

    @staticmethod
    def nonneg(n):
        return Cone(ConeKind.NONNEG, n)

    @staticmethod
    def soc(k):
        return Cone(ConeKind.SOC, k)

    @staticmethod
    def exp():
        return Cone(ConeKind.EXP, 3)

    @staticmethod
    def free(n):
        return Cone(ConeKind.FREE, n)


_DUAL_KIND = {
    ConeKind.ZERO: ConeKind.FREE,
    ConeKind.FREE: ConeKind.ZERO,
    ConeKind.NONNEG: ConeKind.NONNEG,
    ConeKind.SOC: ConeKind.SOC,
    ConeKind.EXP: ConeKind.EXP_DUAL,
    ConeKind.EXP_DUAL: ConeKind.EXP,
}


def dual_cone(cone):
    """Dual cone, same dimension.  dual(dual(K)) == K for all kinds."""
    return Cone(_DUAL_KIND[cone.kind], cone.dim)


# --- scalar projection routines -------------------------------------------

# Relative slack for the exponential-cone membership shortcuts.  Points
# produced by a previous projection land within roundoff of the boundary;
# without the slack, idempotence would depend on the root-finder instead
# of being a cheap early-out.
_EXP_BOUNDARY_SLACK = 1e-10


def _in_exp(r, s, t, slack=_EXP_BOUNDARY_SLACK):
    scale = max(1.0, abs(r), abs(s), abs(t))
    if s > 0.0:
        q = r / s
        if q > 700.0:
            return False
        return t - s * math.exp(q) >= -slack * scale
    if abs(s) <= slack * scale:
        return r <= slack * scale and t >= -slack * scale
    return False


def _in_exp_dual(u, v, w, slack=_EXP_BOUNDARY_SLACK):
    scale = max(1.0, abs(u), abs(v), abs(w))
    if u < 0.0:
        q = v / u
        if q > 700.0:
            return False
        return math.e * w + u * math.exp(q) >= -slack * scale
    if abs(u) <= slack * scale:
        return v >= -slack * scale and w >= -slack * scale
    return False


def _exp_resid(alpha, r, s, t):
    """Stationarity residual of the boundary projection, in alpha = x/y."""
    ex = math.exp(alpha)
    e2 = ex * ex
    return (r + t * ex) * (1.0 + e2 * (1.0 - alpha)) - (
        s + t * ex * (1.0 - alpha)
    ) * (alpha + e2)


def _exp_point(alpha, r, s, t):
    """Boundary point (x, y, z) implied by alpha; y may be invalid (<= 0)."""
    ex = math.exp(alpha)
    den1 = alpha + ex * ex
    den2 = 1.0 + ex * ex * (1.0 - alpha)
    if abs(den1) >= abs(den2):
        y = (r + t * ex) / den1 if den1 != 0.0 else math.nan
    else:
        y = (s + t * ex * (1.0 - alpha)) / den2 if den2 != 0.0 else math.nan
    return alpha * y, y, y * ex


_EXP_PROJ_TOL = 1e-12
_EXP_PROJ_MAXIT = 100


def _refine_root(lo, hi, glo, r, s, t):
    """Safeguarded Newton/bisection on _exp_resid over the bracket [lo, hi]."""
    alpha = 0.5 * (lo + hi)
    for _ in range(_EXP_PROJ_MAXIT):
        g = _exp_resid(alpha, r, s, t)
        if g == 0.0 or hi - lo < _EXP_PROJ_TOL * max(1.0, abs(alpha)):
            break
        if (g > 0.0) == (glo > 0.0):
            lo = alpha
        else:
            hi = alpha
        # Newton step from the midpoint; fall back to bisection when it
        # leaves the bracket.
        h = 1e-7 * max(1.0, abs(alpha))
        dg = (_exp_resid(alpha + h, r, s, t) - g) / h
        step = alpha - g / dg if dg != 0.0 else math.inf
        if lo < step < hi:
            alpha = step
        else:
            alpha = 0.5 * (lo + hi)
    return alpha


def proj_exp(r, s, t):
    """Euclidean projection of (r, s, t) onto the exponential cone."""
    if _in_exp(r, s, t):
        return r, s, t
    if _in_exp_dual(-r, -s, -t):
        return 0.0, 0.0, 0.0
    if r <= 0.0 and s <= 0.0:
        return r, 0.0, max(t, 0.0)

    # Remaining case: projection on the smooth boundary y*exp(x/y) = z.
    # Scan for sign changes of the stationarity residual in alpha = x/y,
    # refine each bracket, keep the closest valid candidate.  The ridge
    # (y = 0 face) stays in the candidate set as a fallback.
    best = (min(r, 0.0), 0.0, max(t, 0.0))
    best_d = (best[0] - r) ** 2 + (best[1] - s) ** 2 + (best[2] - t) ** 2
    n_scan = 600
    lo_a, hi_a = -30.0, 30.0
    step = (hi_a - lo_a) / n_scan
    gprev = _exp_resid(lo_a, r, s, t)
    aprev = lo_a
    for i in range(1, n_scan + 1):
        a = lo_a + i * step
        g = _exp_resid(a, r, s, t)
        if gprev == 0.0 or (gprev > 0.0) != (g > 0.0):
            alpha = _refine_root(aprev, a, gprev, r, s, t)
            x, y, z = _exp_point(alpha, r, s, t)
            if math.isfinite(y) and y > 0.0 and y * math.exp(alpha) - t >= -1e-9:
                d = (x - r) ** 2 + (y - s) ** 2 + (z - t) ** 2
                if d < best_d:
                    best, best_d = (x, y, z), d
        gprev, aprev = g, a

    # Far-negative root: for s > 0 the residual is r - s*alpha + O(e^alpha),
    # so a root near alpha = r/s can sit far left of the scan window (the
    # projection is then close to (r, s, 0), e.g. small s with t < 0).
    if s > 0.0 and r / s < lo_a:
        a0 = r / s
        alpha = _refine_root(a0 - 1.0, a0 + 1.0, _exp_resid(a0 - 1.0, r, s, t), r, s, t)
        x, y, z = _exp_point(alpha, r, s, t)
        if math.isfinite(y) and y > 0.0 and y * math.exp(alpha) - t >= -1e-9:
            d = (x - r) ** 2 + (y - s) ** 2 + (z - t) ** 2
            if d < best_d:
                best = (x, y, z)
    return best


def proj_soc(v):
    """Projection onto the second-order cone {(t, x): ||x|| <= t}."""
    t = v[0]
    x = v[1:]
    nx = math.sqrt(float(np.dot(x, x)))
    if nx <= t:
        return np.array(v, dtype=float)
    if nx <= -t:
        return np.zeros(len(v))
    out = np.empty(len(v))
    a = 0.5 * (t + nx)
    out[0] = a
    out[1:] = (a / nx) * x
    return out


def project(cone, v):
    """Euclidean projection of v onto the cone.  Total function."""
    v = np.asarray(v, dtype=float)
    if v.shape != (cone.dim,):
        raise ValueError(f"vector has shape {v.shape}, cone dimension {cone.dim}")
    kind = cone.kind
    if kind == ConeKind.ZERO:
        return np.zeros(cone.dim)
    if kind == ConeKind.FREE:
        return v.copy()
    if kind == ConeKind.NONNEG:
        return np.maximum(v, 0.0)
    if kind == ConeKind.SOC:
        return proj_soc(v)
    if kind == ConeKind.EXP:
        return np.array(proj_exp(v[0], v[1], v[2]))
    # dual exp via Moreau: P_{K*}(v) = v + P_K(-v)
    p = proj_exp(-v[0], -v[1], -v[2])
    return np.array([v[0] + p[0], v[1] + p[1], v[2] + p[2]])


def check_membership(cone, v, tol):
    """True iff the distance from v to the cone is at most tol."""
    v = np.asarray(v, dtype=float)
    return float(np.linalg.norm(v - project(cone, v))) <= tol


def cone_layout(cones):
    """Flat (kinds, starts, dims) arrays for a cone product, for the kernels."""
    kinds = np.array([int(c.kind) for c in cones], dtype=np.int64)
    dims = np.array([c.dim for c in cones], dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(dims)[:-1])).astype(np.int64)
    return kinds, starts, dims
