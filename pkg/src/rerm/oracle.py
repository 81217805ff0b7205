"""Independent brute-force verifiers: grid suprema, polytope vertices,
analytical ball formulas.

These deliberately avoid the conic pipeline: grid membership goes through
primitive evaluation on SetExpr, vertex enumeration works on the raw
half-space data, and the ball formulas are closed-form.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .losses import MonotoneClass
from .sets import AffineEq, AffineIneq, Box, FixCoords, SetExpr

__all__ = [
    "GridSpec",
    "grid_sup_linear",
    "polytope_vertices",
    "analytical_ball_worst_case",
]

_MAX_SUBSETS = 100_000
_CHUNK = 2_000_000


@dataclass(frozen=True)
class GridSpec:
    """Per-coordinate ranges and a common step for grid enumeration."""

    ranges: tuple  # ((lo, hi), ...) for the gridded coordinates
    step: float
    point_cap: int = 20_000_000

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")

    def axes(self):
        return [
            np.arange(lo, hi + 0.5 * self.step, self.step) for lo, hi in self.ranges
        ]


def _fixed_coords(s):
    """Coordinates pinned by FixCoords primitives, as {index: value}."""
    fixed = {}
    for c in s.constraints:
        if isinstance(c, FixCoords):
            J = c.coords(s.dim)
            vals = np.asarray(c.values, dtype=float)
            for j, v in zip(J, vals):
                fixed[int(j)] = float(v)
    return fixed


def grid_sup_linear(s, theta, grid, tol=1e-9):
    """Grid lower bound on sup{theta^T x : x in s}.

    Fixed coordinates are excluded from the grid; at most 3 effective
    coordinates are allowed.  Returns (value, error_bound) where the
    error bound is ||theta||_2 * step * sqrt(d_eff).
    """
    theta = np.asarray(theta, dtype=float)
    fixed = _fixed_coords(s)
    free = [j for j in range(s.dim) if j not in fixed]
    if len(free) > 3:
        raise ValueError(f"{len(free)} effective coordinates; the grid oracle caps at 3")
    if len(grid.ranges) != len(free):
        raise ValueError("grid must supply one range per free coordinate")

    axes = grid.axes()
    total = int(np.prod([len(a) for a in axes])) if axes else 1
    if total > grid.point_cap:
        raise ValueError(f"grid has {total} points, cap is {grid.point_cap}")

    base = np.zeros(s.dim)
    for j, v in fixed.items():
        base[j] = v
    offset = float(theta @ base)  # contribution of fixed coords

    if not free:
        if s.violation(base[None, :])[0] > tol:
            raise ValueError("fixed point violates the set constraints")
        return offset, 0.0

    best = -math.inf
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    for start in range(0, len(flat), _CHUNK):
        chunk = flat[start : start + _CHUNK]
        pts = np.tile(base, (len(chunk), 1))
        pts[:, free] = chunk
        ok = s.violation(pts) <= tol
        if np.any(ok):
            vals = chunk[ok] @ theta[free]
            best = max(best, float(vals.max()))
    if best == -math.inf:
        raise ValueError("no grid point lies in the set")
    err = float(np.linalg.norm(theta)) * grid.step * math.sqrt(len(free))
    return best + offset, err


def _hrep(s):
    """Half-space data (C, g) for Cx <= g and equalities (E, e)."""
    C_rows, g_rows, E_rows, e_rows = [], [], [], []
    d = s.dim
    for c in s.constraints:
        if isinstance(c, AffineIneq):
            M = np.atleast_2d(np.asarray(c.M, dtype=float))
            C_rows.extend(M)
            g_rows.extend(np.atleast_1d(np.asarray(c.m, dtype=float)))
        elif isinstance(c, AffineEq):
            M = np.atleast_2d(np.asarray(c.M, dtype=float))
            E_rows.extend(M)
            e_rows.extend(np.atleast_1d(np.asarray(c.m, dtype=float)))
        elif isinstance(c, Box):
            l = np.asarray(c.l, dtype=float)
            u = np.asarray(c.u, dtype=float)
            for j in range(d):
                if np.isfinite(u[j]):
                    row = np.zeros(d)
                    row[j] = 1.0
                    C_rows.append(row)
                    g_rows.append(u[j])
                if np.isfinite(l[j]):
                    row = np.zeros(d)
                    row[j] = -1.0
                    C_rows.append(row)
                    g_rows.append(-l[j])
        elif isinstance(c, FixCoords):
            J = c.coords(d)
            vals = np.asarray(c.values, dtype=float)
            for j, v in zip(J, vals):
                row = np.zeros(d)
                row[j] = 1.0
                E_rows.append(row)
                e_rows.append(v)
        else:
            raise ValueError(
                f"{type(c).__name__} is not a linear primitive; "
                "vertex enumeration handles polytopes only"
            )
    C = np.array(C_rows).reshape(-1, d)
    g = np.array(g_rows, dtype=float)
    E = np.array(E_rows).reshape(-1, d)
    e = np.array(e_rows, dtype=float)
    return C, g, E, e


def polytope_vertices(s, tol=1e-7):
    """All vertices of a bounded polytope given by linear primitives.

    H-representation enumeration: every d-subset of active constraints
    (equalities always included), feasibility-filtered and deduplicated.
    d <= 6; raises on unbounded or degenerate input.
    """
    d = s.dim
    if d > 6:
        raise ValueError("vertex enumeration caps at d = 6")
    C, g, E, e = _hrep(s)
    k = d - len(E)
    if k < 0:
        raise ValueError("more equalities than dimensions")
    n_sub = math.comb(len(C), k) if k else 1
    if n_sub > _MAX_SUBSETS:
        raise ValueError(f"{n_sub} candidate subsets exceed the cap {_MAX_SUBSETS}")

    if _unbounded(C, E, d):
        raise ValueError("polytope is unbounded")

    verts = []
    for subset in itertools.combinations(range(len(C)), k):
        M = np.vstack([E, C[list(subset)]]) if k else E
        rhs = np.concatenate([e, g[list(subset)]]) if k else e
        if np.linalg.matrix_rank(M, tol=1e-10) < d:
            continue
        x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.abs(M @ x - rhs).max() > tol:
            continue
        if len(C) and np.max(C @ x - g) > tol:
            continue
        if len(E) and np.abs(E @ x - e).max() > tol:
            continue
        verts.append(x)
    if not verts:
        raise ValueError("degenerate polytope: no vertices found")
    out = []
    for v in verts:
        if not any(np.linalg.norm(v - w) <= 1e-8 * (1 + np.linalg.norm(v)) for w in out):
            out.append(v)
    return np.array(out)


def _unbounded(C, E, d):
    """True iff the recession cone {r: Cr <= 0, Er = 0} contains r != 0."""
    from scipy.optimize import linprog

    A_ub = C if len(C) else None
    b_ub = np.zeros(len(C)) if len(C) else None
    A_eq = E if len(E) else None
    b_eq = np.zeros(len(E)) if len(E) else None
    for j in range(d):
        for sign in (1.0, -1.0):
            cost = np.zeros(d)
            cost[j] = -sign  # maximize sign * r_j
            res = linprog(
                cost,
                A_ub=A_ub,
                b_ub=b_ub,
                A_eq=A_eq,
                b_eq=b_eq,
                bounds=[(-1, 1)] * d,
                method="highs",
            )
            if res.status == 0 and -res.fun > 1e-7:
                return True
    return False


def analytical_ball_worst_case(x_nom, y, rho, theta, loss):
    """Closed-form worst-case loss for a Euclidean ball around x_nom."""
    x_nom = np.asarray(x_nom, dtype=float)
    theta = np.asarray(theta, dtype=float)
    resid = float(x_nom @ theta) - float(y)
    margin = float(rho) * float(np.linalg.norm(theta))
    if loss.monotone_class == MonotoneClass.NON_INCREASING:
        return loss.evaluate(resid - margin)
    return loss.evaluate(abs(resid) + margin)
