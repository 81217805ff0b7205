"""Conic program container, assembly helper, and JSON serialization.

A program is
    minimize    q^T w
    subject to  A w + b in K_1 x ... x K_m
over w in R^N.  The name map assigns each logical variable (theta, z,
per-datapoint duals, loss auxiliaries) a contiguous column range.
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .cones import Cone, ConeKind

__all__ = ["ConicProgram", "ProgramBuilder", "Residuals", "Solution", "SolveStatus"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConicProgram:
    q: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: tuple
    names: dict  # name -> (start, stop) column range

    def __post_init__(self):
        m = sum(c.dim for c in self.cones)
        if self.A.shape != (m, len(self.q)):
            raise ValueError(
                f"A is {self.A.shape}, expected ({m}, {len(self.q)})"
            )
        if len(self.b) != m:
            raise ValueError("offset length does not match total cone dimension")
        covered = sorted(self.names.values())
        pos = 0
        for start, stop in covered:
            if start != pos:
                raise ValueError("name map ranges must partition the columns")
            pos = stop
        if pos != self.num_vars:
            raise ValueError("name map ranges must partition the columns")

    @property
    def num_vars(self):
        return len(self.q)

    @property
    def num_rows(self):
        return len(self.b)

    def var_slice(self, name):
        start, stop = self.names[name]
        return slice(start, stop)

    def to_json(self):
        A = self.A.tocoo()
        doc = {
            "version": SCHEMA_VERSION,
            "q": self.q.tolist(),
            "A": {
                "shape": list(self.A.shape),
                "rows": A.row.tolist(),
                "cols": A.col.tolist(),
                "vals": A.data.tolist(),
            },
            "b": self.b.tolist(),
            "cones": [{"kind": c.kind.name.lower(), "dim": c.dim} for c in self.cones],
            "names": {k: list(v) for k, v in self.names.items()},
        }
        return json.dumps(doc, indent=None, sort_keys=True)

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        if doc.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported program version {doc.get('version')!r}")
        shape = tuple(doc["A"]["shape"])
        A = sp.coo_matrix(
            (doc["A"]["vals"], (doc["A"]["rows"], doc["A"]["cols"])), shape=shape
        ).tocsc()
        A.sum_duplicates()
        A.sort_indices()
        cones = tuple(
            Cone(ConeKind[c["kind"].upper()], int(c["dim"])) for c in doc["cones"]
        )
        names = {k: tuple(v) for k, v in doc["names"].items()}
        return ConicProgram(
            q=np.asarray(doc["q"], dtype=float),
            A=A,
            b=np.asarray(doc["b"], dtype=float),
            cones=cones,
            names=names,
        )


class ProgramBuilder:
    """Incremental triplet-based assembly of a ConicProgram.

    Rows are written as linear expressions: a list of (column, coefficient)
    terms plus a constant, with semantics  sum(coef * w[col]) + const in K.
    Duplicate triplets are summed at finalize; column order is the order
    in which variables were registered, row order the order in which
    constraint blocks were added, so assembly is deterministic.
    """

    def __init__(self):
        self._nvar = 0
        self._names = {}
        self._rows = 0
        self._cones = []
        self._r = []
        self._c = []
        self._v = []
        self._b = []
        self._obj = []  # (col, coef)

    def add_var(self, name, dim):
        """Registers a variable block; returns its column range."""
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        rng = range(self._nvar, self._nvar + dim)
        self._names[name] = (rng.start, rng.stop)
        self._nvar += dim
        return rng

    def add_objective(self, col, coef):
        self._obj.append((col, coef))

    def add_block(self, cone, rows):
        """Adds one cone block; rows is a list of (terms, const) pairs."""
        if len(rows) != cone.dim:
            raise ValueError(f"cone has dim {cone.dim}, got {len(rows)} rows")
        for terms, const in rows:
            for col, coef in terms:
                if coef != 0.0:
                    self._r.append(self._rows)
                    self._c.append(col)
                    self._v.append(float(coef))
            self._b.append(float(const))
            self._rows += 1
        self._cones.append(cone)

    def finalize(self):
        A = sp.coo_matrix(
            (self._v, (self._r, self._c)), shape=(self._rows, self._nvar)
        ).tocsc()
        A.sum_duplicates()
        A.sort_indices()
        q = np.zeros(self._nvar)
        for col, coef in self._obj:
            q[col] += coef
        return ConicProgram(
            q=q,
            A=A,
            b=np.asarray(self._b, dtype=float),
            cones=tuple(self._cones),
            names=dict(self._names),
        )


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL_ERROR = "numerical_error"


@dataclass(frozen=True)
class Residuals:
    primal: float
    dual: float
    gap: float
    primal_rel: float
    dual_rel: float
    gap_rel: float

    def max_abs(self):
        return max(self.primal, self.dual, self.gap)


@dataclass(frozen=True)
class Certificate:
    kind: SolveStatus  # PRIMAL_INFEASIBLE or DUAL_INFEASIBLE
    witness: np.ndarray
    residual: float


@dataclass(frozen=True)
class Solution:
    status: SolveStatus
    primal: np.ndarray
    dual: np.ndarray
    objective: float
    residuals: Residuals
    iterations: int = 0
    certificate: Certificate | None = None

    def var(self, prog, name):
        return self.primal[prog.var_slice(name)]
