"""Loss atoms: evaluation, monotonicity class, and conic epigraph rows.

Supported losses and classes:
  * pnorm (p in {1, 2}) and huber: even, non-decreasing on R+
  * hinge, logistic, exponential: non-increasing

Epigraph encodings (f(z) <= c):
  * |z|:      c - z >= 0, c + z >= 0
  * z^2:      ((c+1)/2, (c-1)/2, z) in SOC
  * huber:    aux (u, v): u+v >= |z|, v >= 0, and
              u^2 <= 2*(c - delta*v) as ((t+1/2), (t-1/2), u) in SOC
              with t = c - delta*v
  * hinge:    c >= 0, c >= 1 - z
  * logistic: aux (a, b): exp(-z-c) <= a, exp(-c) <= b, a + b <= 1
  * exp:      exp(-z) <= c via (-z, 1, c) in the exponential cone
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .cones import Cone

__all__ = ["LossKind", "MonotoneClass", "LossSpec", "classification_transform"]


class LossKind(enum.Enum):
    PNORM = "pnorm"
    HUBER = "huber"
    HINGE = "hinge"
    LOGISTIC = "logistic"
    EXPONENTIAL = "exponential"


class MonotoneClass(enum.Enum):
    NON_INCREASING = "non_increasing"
    EVEN_NONDECREASING = "even_nondecreasing"


_CLASS = {
    LossKind.PNORM: MonotoneClass.EVEN_NONDECREASING,
    LossKind.HUBER: MonotoneClass.EVEN_NONDECREASING,
    LossKind.HINGE: MonotoneClass.NON_INCREASING,
    LossKind.LOGISTIC: MonotoneClass.NON_INCREASING,
    LossKind.EXPONENTIAL: MonotoneClass.NON_INCREASING,
}


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind
    p: int = 2
    delta: float = 1.0

    def __post_init__(self):
        if self.kind == LossKind.PNORM and self.p not in (1, 2):
            raise ValueError("only p in {1, 2} is supported")
        if self.kind == LossKind.HUBER and self.delta <= 0:
            raise ValueError("huber delta must be positive")

    @property
    def monotone_class(self):
        return _CLASS[self.kind]

    def evaluate(self, z):
        """Loss value; accepts scalars or arrays."""
        z = np.asarray(z, dtype=float)
        k = self.kind
        if k == LossKind.PNORM:
            out = np.abs(z) ** self.p
        elif k == LossKind.HUBER:
            a = np.abs(z)
            out = np.where(
                a <= self.delta, 0.5 * z**2, self.delta * a - 0.5 * self.delta**2
            )
        elif k == LossKind.HINGE:
            out = np.maximum(0.0, 1.0 - z)
        elif k == LossKind.LOGISTIC:
            out = np.logaddexp(0.0, -z)
        else:
            out = np.exp(-z)
        return float(out) if out.ndim == 0 else out

    def emit_epigraph(self, pb, z_col, c_col, tag):
        """Adds rows satisfiable iff f(z) <= c; fresh auxiliaries per call."""
        k = self.kind
        if k == LossKind.PNORM and self.p == 1:
            pb.add_block(
                Cone.nonneg(2),
                [
                    ([(c_col, 1.0), (z_col, -1.0)], 0.0),
                    ([(c_col, 1.0), (z_col, 1.0)], 0.0),
                ],
            )
        elif k == LossKind.PNORM:
            pb.add_block(
                Cone.soc(3),
                [
                    ([(c_col, 0.5)], 0.5),
                    ([(c_col, 0.5)], -0.5),
                    ([(z_col, 1.0)], 0.0),
                ],
            )
        elif k == LossKind.HUBER:
            (u, v) = pb.add_var(f"{tag}.huber_aux", 2)
            d = self.delta
            pb.add_block(
                Cone.nonneg(3),
                [
                    ([(u, 1.0), (v, 1.0), (z_col, -1.0)], 0.0),
                    ([(u, 1.0), (v, 1.0), (z_col, 1.0)], 0.0),
                    ([(v, 1.0)], 0.0),
                ],
            )
            # u^2 <= 2t, t = c - delta*v
            pb.add_block(
                Cone.soc(3),
                [
                    ([(c_col, 1.0), (v, -d)], 0.5),
                    ([(c_col, 1.0), (v, -d)], -0.5),
                    ([(u, 1.0)], 0.0),
                ],
            )
        elif k == LossKind.HINGE:
            pb.add_block(
                Cone.nonneg(2),
                [
                    ([(c_col, 1.0)], 0.0),
                    ([(c_col, 1.0), (z_col, 1.0)], -1.0),
                ],
            )
        elif k == LossKind.LOGISTIC:
            (a, b) = pb.add_var(f"{tag}.logistic_aux", 2)
            pb.add_block(
                Cone.exp(),
                [
                    ([(z_col, -1.0), (c_col, -1.0)], 0.0),
                    ([], 1.0),
                    ([(a, 1.0)], 0.0),
                ],
            )
            pb.add_block(
                Cone.exp(),
                [
                    ([(c_col, -1.0)], 0.0),
                    ([], 1.0),
                    ([(b, 1.0)], 0.0),
                ],
            )
            pb.add_block(Cone.nonneg(1), [([(a, -1.0), (b, -1.0)], 1.0)])
        else:  # EXPONENTIAL
            pb.add_block(
                Cone.exp(),
                [
                    ([(z_col, -1.0)], 0.0),
                    ([], 1.0),
                    ([(c_col, 1.0)], 0.0),
                ],
            )

    def min_epigraph_c(self, z, lo=0.0, hi=None, tol=1e-9):
        """Minimal feasible c by bisection over the constraint system.

        Independent of the conic solver: uses only the algebraic form of
        the epigraph rows (auxiliaries minimized out in closed form).
        Used by tests to certify epigraph tightness.
        """
        k = self.kind

        def feasible(c):
            if k == LossKind.PNORM and self.p == 1:
                return c >= z and c >= -z
            if k == LossKind.PNORM:
                # SOC ((c+1)/2, (c-1)/2, z)
                return (0.5 * (c + 1)) >= math.hypot(0.5 * (c - 1), z)
            if k == LossKind.HUBER:
                d = self.delta
                # best v for given c: minimize 0.5*max(|z|-v,0)^2 + d*v <= c
                vs = np.linspace(0.0, abs(z) + 1.0, 20001)
                g = 0.5 * np.maximum(abs(z) - vs, 0.0) ** 2 + d * vs
                return g.min() <= c
            if k == LossKind.HINGE:
                return c >= 0 and c >= 1 - z
            if k == LossKind.LOGISTIC:
                # minimal aux values on the exp-cone boundaries
                return math.exp(-z - c) + math.exp(-c) <= 1.0
            return c >= math.exp(-z)

        if hi is None:
            hi = max(1.0, abs(z)) * 4 + 10.0
            while not feasible(hi):
                hi *= 2.0
                if hi > 1e12:
                    raise RuntimeError("no feasible epigraph value found")
        lo_ = lo
        if feasible(lo_):
            return lo_
        for _ in range(200):
            mid = 0.5 * (lo_ + hi)
            if feasible(mid):
                hi = mid
            else:
                lo_ = mid
            if hi - lo_ < tol:
                break
        return hi


def classification_transform(X, y):
    """Maps a {-1,+1}-labeled dataset to the regression form (y_i*x_i, 0)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if not np.all(np.isin(y, (-1, 1))):
        bad = np.flatnonzero(~np.isin(y, (-1, 1)))
        raise ValueError(f"labels must be in {{-1, +1}}; offending rows {bad.tolist()}")
    return X * y[:, None].astype(float), np.zeros(len(y))
