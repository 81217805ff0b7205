"""Uncertainty-set descriptions and their canonicalization to conic form.

A SetExpr is an intersection of primitive constraints on a vector
x in R^d.  ``canonicalize`` compiles it to a ConicRep
{x | exists u: F x + G u + h in K}, the form the dualization engine
consumes.  Primitive membership evaluation (``contains``) deliberately
shares no code with the conic path so it can serve as an oracle.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .cones import Cone

__all__ = [
    "AffineEq",
    "AffineIneq",
    "Box",
    "NormBall",
    "SumSquaresBall",
    "FixCoords",
    "SetExpr",
    "ConicRep",
    "intersect",
    "canonicalize",
    "validate_compactness_hint",
    "set_from_json",
    "set_to_json",
]


def _idx(dim, rng, idx):
    """Resolves an optional coordinate subrange/index list to an array."""
    if rng is not None and idx is not None:
        raise ValueError("give either a range or an index list, not both")
    if rng is not None:
        lo, hi = rng
        out = np.arange(lo, hi)
    elif idx is not None:
        out = np.asarray(idx, dtype=int)
    else:
        out = np.arange(dim)
    if len(out) == 0 or out.min() < 0 or out.max() >= dim:
        raise ValueError(f"coordinate indices {out} out of range for d={dim}")
    return out


@dataclass(frozen=True)
class AffineEq:
    """M x = m."""

    M: np.ndarray
    m: np.ndarray

    def check(self, dim):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.shape[1] != dim or len(np.atleast_1d(self.m)) != M.shape[0]:
            raise ValueError("affine equality has inconsistent shapes")

    def violation(self, pts):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        return np.abs(pts @ M.T - m).max(axis=-1)


@dataclass(frozen=True)
class AffineIneq:
    """M x <= m."""

    M: np.ndarray
    m: np.ndarray

    def check(self, dim):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.shape[1] != dim or len(np.atleast_1d(self.m)) != M.shape[0]:
            raise ValueError("affine inequality has inconsistent shapes")

    def violation(self, pts):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        return np.maximum(pts @ M.T - m, 0.0).max(axis=-1)


@dataclass(frozen=True)
class Box:
    """l <= x <= u elementwise; entries may be +-inf."""

    l: np.ndarray
    u: np.ndarray

    def check(self, dim):
        l = np.asarray(self.l, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if l.shape != (dim,) or u.shape != (dim,):
            raise ValueError("box bounds must have the set dimension")
        both = np.isfinite(l) & np.isfinite(u)
        if np.any(l[both] > u[both]):
            raise ValueError("box has l > u on some coordinate")

    def violation(self, pts):
        l = np.asarray(self.l, dtype=float)
        u = np.asarray(self.u, dtype=float)
        lo = np.where(np.isfinite(l), l - pts, -np.inf)
        hi = np.where(np.isfinite(u), pts - u, -np.inf)
        return np.maximum(np.maximum(lo, hi), 0.0).max(axis=-1)


@dataclass(frozen=True)
class NormBall:
    """||x_J - center||_p <= radius for p in {1, 2, inf}."""

    p: float
    center: np.ndarray
    radius: float
    rng: tuple | None = None
    idx: tuple | None = None

    def check(self, dim):
        if self.p not in (1, 2, math.inf):
            raise ValueError("norm ball kind must be 1, 2 or inf")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        J = _idx(dim, self.rng, self.idx)
        if np.asarray(self.center, dtype=float).shape != (len(J),):
            raise ValueError("center length must match the coordinate subset")

    def coords(self, dim):
        return _idx(dim, self.rng, self.idx)

    def violation(self, pts):
        J = self.coords(pts.shape[-1])
        diff = pts[..., J] - np.asarray(self.center, dtype=float)
        if self.p == 2:
            nrm = np.sqrt((diff**2).sum(axis=-1))
        elif self.p == 1:
            nrm = np.abs(diff).sum(axis=-1)
        else:
            nrm = np.abs(diff).max(axis=-1)
        return np.maximum(nrm - self.radius, 0.0)


@dataclass(frozen=True)
class SumSquaresBall:
    """||x_J - center||_2^2 <= r."""

    center: np.ndarray
    r: float
    rng: tuple | None = None
    idx: tuple | None = None

    def check(self, dim):
        if self.r < 0:
            raise ValueError("squared radius must be nonnegative")
        J = _idx(dim, self.rng, self.idx)
        if np.asarray(self.center, dtype=float).shape != (len(J),):
            raise ValueError("center length must match the coordinate subset")

    def coords(self, dim):
        return _idx(dim, self.rng, self.idx)

    def violation(self, pts):
        J = self.coords(pts.shape[-1])
        diff = pts[..., J] - np.asarray(self.center, dtype=float)
        return np.maximum((diff**2).sum(axis=-1) - self.r, 0.0)


@dataclass(frozen=True)
class FixCoords:
    """x_J = values."""

    values: np.ndarray
    rng: tuple | None = None
    idx: tuple | None = None

    def check(self, dim):
        J = _idx(dim, self.rng, self.idx)
        if np.asarray(self.values, dtype=float).shape != (len(J),):
            raise ValueError("values length must match the coordinate subset")

    def coords(self, dim):
        return _idx(dim, self.rng, self.idx)

    def violation(self, pts):
        J = self.coords(pts.shape[-1])
        return np.abs(pts[..., J] - np.asarray(self.values, dtype=float)).max(axis=-1)


_PRIMITIVES = (AffineEq, AffineIneq, Box, NormBall, SumSquaresBall, FixCoords)


@dataclass(frozen=True)
class SetExpr:
    """Intersection of primitive constraints on x in R^d."""

    dim: int
    constraints: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("set dimension must be at least 1")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if not isinstance(c, _PRIMITIVES):
                raise TypeError(f"unknown primitive {type(c).__name__}")
            c.check(self.dim)

    def violation(self, pts):
        """Max constraint violation per point; 0 means member."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(pts.shape[0])
        for c in self.constraints:
            np.maximum(out, c.violation(pts), out=out)
        return out

    def contains(self, x, tol=1e-9):
        return bool(self.violation(np.asarray(x, dtype=float)[None, :])[0] <= tol)


def intersect(a, b):
    """Intersection of two sets of the same dimension."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return SetExpr(a.dim, a.constraints + b.constraints)


@dataclass(frozen=True)
class ConicRep:
    """{x | exists u: F x + G u + h in K}."""

    F: sp.csc_matrix
    G: sp.csc_matrix
    h: np.ndarray
    cones: tuple

    def __post_init__(self):
        m = sum(c.dim for c in self.cones)
        if self.F.shape[0] != m or self.G.shape[0] != m or len(self.h) != m:
            raise ValueError("row count must equal total cone dimension")

    @property
    def dim(self):
        return self.F.shape[1]

    @property
    def aux_dim(self):
        return self.G.shape[1]


class _RepBuilder:
    def __init__(self, dim):
        self.dim = dim
        self.aux = 0
        self.rows = 0
        self.cones = []
        self.f = []  # (row, col, val)
        self.g = []
        self.h = []

    def new_aux(self, k):
        rng = range(self.aux, self.aux + k)
        self.aux += k
        return rng

    def add(self, cone, rows):
        """rows: list of (f_terms, g_terms, const)."""
        if len(rows) != cone.dim:
            raise ValueError("row/cone dimension mismatch")
        for f_terms, g_terms, const in rows:
            for col, val in f_terms:
                if val != 0.0:
                    self.f.append((self.rows, col, float(val)))
            for col, val in g_terms:
                if val != 0.0:
                    self.g.append((self.rows, col, float(val)))
            self.h.append(float(const))
            self.rows += 1
        self.cones.append(cone)

    def finalize(self):
        def mat(trips, ncols):
            if trips:
                r, c, v = zip(*trips)
            else:
                r, c, v = (), (), ()
            M = sp.coo_matrix((v, (r, c)), shape=(self.rows, ncols)).tocsc()
            M.sum_duplicates()
            M.sort_indices()
            return M

        return ConicRep(
            F=mat(self.f, self.dim),
            G=mat(self.g, self.aux),
            h=np.asarray(self.h, dtype=float),
            cones=tuple(self.cones),
        )


def canonicalize(s):
    """Conic representation of the set; pure, deterministic row order."""
    rb = _RepBuilder(s.dim)
    for c in s.constraints:
        _canon_one(rb, c, s.dim)
    return rb.finalize()


def _canon_one(rb, c, dim):
    if isinstance(c, AffineEq):
        M = np.atleast_2d(np.asarray(c.M, dtype=float))
        m = np.atleast_1d(np.asarray(c.m, dtype=float))
        rows = [
            ([(j, -M[i, j]) for j in range(dim)], [], m[i]) for i in range(M.shape[0])
        ]
        rb.add(Cone.zero(M.shape[0]), rows)
    elif isinstance(c, AffineIneq):
        M = np.atleast_2d(np.asarray(c.M, dtype=float))
        m = np.atleast_1d(np.asarray(c.m, dtype=float))
        rows = [
            ([(j, -M[i, j]) for j in range(dim)], [], m[i]) for i in range(M.shape[0])
        ]
        rb.add(Cone.nonneg(M.shape[0]), rows)
    elif isinstance(c, Box):
        l = np.asarray(c.l, dtype=float)
        u = np.asarray(c.u, dtype=float)
        rows = []
        for j in range(dim):
            if np.isfinite(u[j]):
                rows.append(([(j, -1.0)], [], u[j]))  # u_j - x_j >= 0
            if np.isfinite(l[j]):
                rows.append(([(j, 1.0)], [], -l[j]))  # x_j - l_j >= 0
        if rows:
            rb.add(Cone.nonneg(len(rows)), rows)
    elif isinstance(c, FixCoords):
        J = c.coords(dim)
        v = np.asarray(c.values, dtype=float)
        rows = [([(int(j), -1.0)], [], v[k]) for k, j in enumerate(J)]
        rb.add(Cone.zero(len(J)), rows)
    elif isinstance(c, NormBall):
        J = c.coords(dim)
        ctr = np.asarray(c.center, dtype=float)
        if c.p == 2:
            rows = [([], [], c.radius)]
            rows += [([(int(j), -1.0)], [], ctr[k]) for k, j in enumerate(J)]
            rb.add(Cone.soc(len(J) + 1), rows)
        elif c.p == math.inf:
            rows = []
            for k, j in enumerate(J):
                rows.append(([(int(j), -1.0)], [], ctr[k] + c.radius))
                rows.append(([(int(j), 1.0)], [], c.radius - ctr[k]))
            rb.add(Cone.nonneg(len(rows)), rows)
        else:  # p == 1: aux u with -u <= x - center <= u, sum(u) <= radius
            aux = rb.new_aux(len(J))
            rows = []
            for k, j in enumerate(J):
                a = aux[k]
                rows.append(([(int(j), -1.0)], [(a, 1.0)], ctr[k]))
                rows.append(([(int(j), 1.0)], [(a, 1.0)], -ctr[k]))
            rows.append(([], [(a, -1.0) for a in aux], c.radius))
            rb.add(Cone.nonneg(len(rows)), rows)
    elif isinstance(c, SumSquaresBall):
        J = c.coords(dim)
        ctr = np.asarray(c.center, dtype=float)
        rows = [([], [], math.sqrt(c.r))]
        rows += [([(int(j), -1.0)], [], ctr[k]) for k, j in enumerate(J)]
        rb.add(Cone.soc(len(J) + 1), rows)
    else:  # pragma: no cover - guarded by SetExpr validation
        raise TypeError(f"unknown primitive {type(c).__name__}")


def validate_compactness_hint(s):
    """Best-effort warnings for coordinates no primitive bounds.

    Necessary-condition heuristic only (half-spaces and general affine
    rows are not credited); never blocks.
    """
    bounded = np.zeros(s.dim, dtype=bool)
    for c in s.constraints:
        if isinstance(c, Box):
            l = np.asarray(c.l, dtype=float)
            u = np.asarray(c.u, dtype=float)
            bounded |= np.isfinite(l) & np.isfinite(u)
        elif isinstance(c, (NormBall, SumSquaresBall, FixCoords)):
            bounded[c.coords(s.dim)] = True
        elif isinstance(c, AffineEq):
            M = np.atleast_2d(np.asarray(c.M, dtype=float))
            for i in range(M.shape[0]):
                nz = np.flatnonzero(M[i])
                if len(nz) == 1:
                    bounded[nz[0]] = True
    free = np.flatnonzero(~bounded)
    return [
        f"coordinate {j} is not obviously bounded; the set may be noncompact"
        for j in free
    ]


# --- JSON schema ----------------------------------------------------------


def _maybe_range(obj):
    rng = obj.get("range")
    idx = obj.get("idx")
    return (tuple(rng) if rng is not None else None, tuple(idx) if idx else None)


def set_from_json(doc):
    """Parses {"dim": d, "constraints": [...]} into a SetExpr."""
    dim = int(doc["dim"])
    cons = []
    for c in doc.get("constraints", []):
        kind = c["type"]
        if kind == "box":
            l = [(-math.inf if v is None else float(v)) for v in c["l"]]
            u = [(math.inf if v is None else float(v)) for v in c["u"]]
            cons.append(Box(np.array(l), np.array(u)))
        elif kind in ("ball1", "ball2", "ballinf"):
            p = {"ball1": 1, "ball2": 2, "ballinf": math.inf}[kind]
            rng, idx = _maybe_range(c)
            cons.append(
                NormBall(p, np.asarray(c["center"], dtype=float), float(c["radius"]),
                         rng=rng, idx=idx)
            )
        elif kind == "sumsq":
            rng, idx = _maybe_range(c)
            cons.append(
                SumSquaresBall(np.asarray(c["center"], dtype=float), float(c["r"]),
                               rng=rng, idx=idx)
            )
        elif kind == "fix":
            rng, idx = _maybe_range(c)
            cons.append(
                FixCoords(np.asarray(c["values"], dtype=float), rng=rng, idx=idx)
            )
        elif kind == "affine_eq":
            cons.append(AffineEq(np.asarray(c["M"], dtype=float),
                                 np.asarray(c["m"], dtype=float)))
        elif kind == "affine_ineq":
            cons.append(AffineIneq(np.asarray(c["M"], dtype=float),
                                   np.asarray(c["m"], dtype=float)))
        else:
            raise ValueError(f"unknown constraint type {kind!r}")
    return SetExpr(dim, tuple(cons))


def set_to_json(s):
    """Inverse of set_from_json."""
    cons = []
    for c in s.constraints:
        if isinstance(c, Box):
            cons.append({
                "type": "box",
                "l": [None if not np.isfinite(v) else float(v) for v in np.asarray(c.l, float)],
                "u": [None if not np.isfinite(v) else float(v) for v in np.asarray(c.u, float)],
            })
        elif isinstance(c, NormBall):
            kind = {1: "ball1", 2: "ball2", math.inf: "ballinf"}[c.p]
            d = {"type": kind, "center": np.asarray(c.center, float).tolist(),
                 "radius": float(c.radius)}
            if c.rng is not None:
                d["range"] = list(c.rng)
            if c.idx is not None:
                d["idx"] = list(c.idx)
            cons.append(d)
        elif isinstance(c, SumSquaresBall):
            d = {"type": "sumsq", "center": np.asarray(c.center, float).tolist(),
                 "r": float(c.r)}
            if c.rng is not None:
                d["range"] = list(c.rng)
            if c.idx is not None:
                d["idx"] = list(c.idx)
            cons.append(d)
        elif isinstance(c, FixCoords):
            d = {"type": "fix", "values": np.asarray(c.values, float).tolist()}
            if c.rng is not None:
                d["range"] = list(c.rng)
            if c.idx is not None:
                d["idx"] = list(c.idx)
            cons.append(d)
        elif isinstance(c, AffineEq):
            cons.append({"type": "affine_eq",
                         "M": np.atleast_2d(np.asarray(c.M, float)).tolist(),
                         "m": np.atleast_1d(np.asarray(c.m, float)).tolist()})
        elif isinstance(c, AffineIneq):
            cons.append({"type": "affine_ineq",
                         "M": np.atleast_2d(np.asarray(c.M, float)).tolist(),
                         "m": np.atleast_1d(np.asarray(c.m, float)).tolist()})
    return {"dim": s.dim, "constraints": cons}
