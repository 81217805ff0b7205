"""Assembly of the full robust-ERM conic program.

For each datapoint the worst-case residual bound z_i is tied to the
uncertainty set through support constraints:

  * non-increasing loss:  S_i(-theta) + y_i <= -z_i   (one block)
  * even loss:            S_i(theta) - y_i <= z_i and
                          S_i(-theta) + y_i <= z_i    (two blocks)

and the loss enters through epigraph rows f(z_i) <= c_i with objective
sum(c_i); the epigraph variables are the cost vector, never eliminated.
A shared-norm fast path covers plain Euclidean-ball sets, where the
worst-case loss has the closed form f(|x~^T theta - y| + rho*||theta||)
(even) or f(x~^T theta - y - rho*||theta||) (non-increasing).
"""

import math
from dataclasses import dataclass

import numpy as np

from .cones import Cone, ConeKind
from .losses import LossSpec, MonotoneClass
from .program import ProgramBuilder, SolveStatus
from .sets import NormBall, SetExpr, canonicalize
from .solver import SolverSettings, solve
from .support import (
    EmptySetError,
    UnboundedSetError,
    emit_support_constraint,
    support_value,
)

__all__ = [
    "RermProblem",
    "RermSolution",
    "RermError",
    "build",
    "build_analytical_ball",
    "worst_case_loss",
    "solve_rerm",
]


class RermError(RuntimeError):
    """Solve-level failure, with best-effort attribution to a datapoint."""

    def __init__(self, msg, datapoint=None, status=None):
        super().__init__(msg)
        self.datapoint = datapoint
        self.status = status


@dataclass(frozen=True)
class RermProblem:
    X: np.ndarray
    y: np.ndarray
    sets: tuple
    loss: LossSpec
    theta_constraints: SetExpr | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "sets", tuple(self.sets))
        n, d = X.shape
        if len(self.y) != n or len(self.sets) != n:
            raise ValueError("X, y and sets must agree on the number of datapoints")
        for i, s in enumerate(self.sets):
            if s.dim != d:
                raise ValueError(f"set {i} has dimension {s.dim}, expected {d}")
        if self.theta_constraints is not None and self.theta_constraints.dim != d:
            raise ValueError("theta constraint set must have dimension d")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class RermSolution:
    theta: np.ndarray
    z: np.ndarray
    objective: float
    per_point_losses: np.ndarray
    diagnostics: object  # the raw solver Solution


def _emit_membership(pb, rep, x_cols, tag):
    """Adds rows F x + G u + h in K with a fresh auxiliary block u."""
    aux = pb.add_var(f"{tag}.aux", rep.aux_dim) if rep.aux_dim else range(0)
    Fc = rep.F.tocoo()
    Gc = rep.G.tocoo()
    m = sum(c.dim for c in rep.cones)
    terms = [[] for _ in range(m)]
    for r, c, v in zip(Fc.row, Fc.col, Fc.data):
        terms[r].append((x_cols[c], v))
    for r, c, v in zip(Gc.row, Gc.col, Gc.data):
        terms[r].append((aux[c], v))
    pos = 0
    for cone in rep.cones:
        pb.add_block(
            cone, [(terms[pos + i], rep.h[pos + i]) for i in range(cone.dim)]
        )
        pos += cone.dim


def _start_program(problem):
    pb = ProgramBuilder()
    theta = pb.add_var("theta", problem.d)
    z = pb.add_var("z", problem.n)
    c = pb.add_var("c", problem.n)
    for i in range(problem.n):
        pb.add_objective(c[i], 1.0)
    if problem.theta_constraints is not None and problem.theta_constraints.constraints:
        _emit_membership(pb, canonicalize(problem.theta_constraints), theta, "theta_set")
    return pb, theta, z, c


def build(problem):
    """General RERM program via per-datapoint support dualization."""
    pb, theta, z, c = _start_program(problem)
    even = problem.loss.monotone_class == MonotoneClass.EVEN_NONDECREASING
    for i in range(problem.n):
        rep = canonicalize(problem.sets[i])
        plus = [[(theta[j], 1.0)] for j in range(problem.d)]
        minus = [[(theta[j], -1.0)] for j in range(problem.d)]
        yi = float(problem.y[i])
        if even:
            # S(theta) <= z_i + y_i
            emit_support_constraint(
                pb, rep, plus, ([(z[i], 1.0)], yi), tag=f"pt{i}.nu+"
            )
            # S(-theta) <= z_i - y_i
            emit_support_constraint(
                pb, rep, minus, ([(z[i], 1.0)], -yi), tag=f"pt{i}.nu-"
            )
        else:
            # S(-theta) <= -z_i - y_i
            emit_support_constraint(
                pb, rep, minus, ([(z[i], -1.0)], -yi), tag=f"pt{i}.nu-"
            )
        problem.loss.emit_epigraph(pb, z[i], c[i], tag=f"pt{i}")
    return pb.finalize()


def _plain_ball(s):
    """The (center, radius) of a set that is a single full-range 2-ball."""
    if len(s.constraints) != 1:
        return None
    c = s.constraints[0]
    if not isinstance(c, NormBall) or c.p != 2:
        return None
    if len(c.coords(s.dim)) != s.dim:
        return None
    return np.asarray(c.center, dtype=float), float(c.radius)


def build_analytical_ball(problem):
    """Fast path for plain Euclidean-ball sets; one shared norm bound."""
    balls = [_plain_ball(s) for s in problem.sets]
    if any(b is None for b in balls):
        raise ValueError("analytical path needs every set to be a plain 2-ball")
    pb, theta, z, c = _start_program(problem)
    (t,) = pb.add_var("theta_norm", 1)
    pb.add_block(
        Cone.soc(problem.d + 1),
        [([(t, 1.0)], 0.0)] + [([(theta[j], 1.0)], 0.0) for j in range(problem.d)],
    )
    even = problem.loss.monotone_class == MonotoneClass.EVEN_NONDECREASING
    for i, (center, rho) in enumerate(balls):
        yi = float(problem.y[i])
        nom = [(theta[j], center[j]) for j in range(problem.d)]
        if even:
            pb.add_block(
                Cone.nonneg(2),
                [
                    ([(z[i], 1.0), (t, -rho)] + [(col, -v) for col, v in nom], yi),
                    ([(z[i], 1.0), (t, -rho)] + nom, -yi),
                ],
            )
        else:
            # x~^T theta - y_i - rho*t >= z_i
            pb.add_block(
                Cone.nonneg(1),
                [([(z[i], -1.0), (t, -rho)] + nom, -yi)],
            )
        problem.loss.emit_epigraph(pb, z[i], c[i], tag=f"pt{i}")
    return pb.finalize()


def worst_case_loss(theta, s, y, loss, settings=None):
    """True worst-case loss at fixed theta via support-function values."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (s.dim,):
        raise ValueError("theta dimension must match the set")
    rep = canonicalize(s)
    if loss.monotone_class == MonotoneClass.NON_INCREASING:
        inf_val = -support_value(rep, -theta, settings)  # inf x^T theta
        return loss.evaluate(inf_val - float(y))
    hi = support_value(rep, theta, settings) - float(y)
    lo = support_value(rep, -theta, settings) + float(y)
    return loss.evaluate(max(hi, lo))


def _diagnose(problem):
    """Best-effort attribution of a failed solve to a datapoint."""
    rng = np.random.default_rng(0)
    for i, s in enumerate(problem.sets):
        rep = canonicalize(s)
        for _ in range(3):
            try:
                support_value(rep, rng.normal(size=s.dim))
            except UnboundedSetError:
                return i, "unbounded uncertainty set"
            except (EmptySetError, RuntimeError):
                return i, "empty or degenerate uncertainty set"
    return None, None


def solve_rerm(problem, settings=None, analytical="auto"):
    """Builds and solves; raises RermError on non-optimal outcomes."""
    use_analytical = analytical is True or (
        analytical == "auto" and all(_plain_ball(s) is not None for s in problem.sets)
    )
    prog = build_analytical_ball(problem) if use_analytical else build(problem)
    sol = solve(prog, settings or SolverSettings())
    if sol.status in (SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE):
        idx, why = _diagnose(problem)
        msg = f"RERM program is {sol.status.value}"
        if idx is not None:
            msg += f"; datapoint {idx}: {why}"
        raise RermError(msg, datapoint=idx, status=sol.status)
    if sol.status == SolveStatus.NUMERICAL_ERROR:
        raise RermError("solver hit a numerical error", status=sol.status)
    theta = sol.var(prog, "theta")
    z = sol.var(prog, "z")
    return RermSolution(
        theta=theta,
        z=z,
        objective=sol.objective,
        per_point_losses=np.asarray(problem.loss.evaluate(z), dtype=float),
        diagnostics=sol,
    )
