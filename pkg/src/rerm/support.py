"""Support-function dualization.

For a set C = {x | exists u: F x + G u + h in K}, Lagrangian duality gives

    S_C(theta) = sup{theta^T x : x in C}
               = inf{h^T nu : F^T nu = -theta, G^T nu = 0, nu in K*},

and for compact nonempty C strong duality holds, so the constraint
S_C(theta) <= t is exactly the feasibility system on the right.
``emit_support_constraint`` splices that system into a program under
construction; ``support_value`` solves it numerically on its own
(test/oracle path, not used while building RERM programs).

Derivation of the sign convention, once and for all: with the constraint
written as F x + G u + h = s, s in K, the Lagrangian is
theta^T x + nu^T (F x + G u + h - s).  Finiteness of the supremum over x
forces theta + F^T nu = 0, over u forces G^T nu = 0, and over s in K
forces nu in K*, leaving the value h^T nu.
"""

from dataclasses import dataclass

import numpy as np

from .cones import Cone, ConeKind, dual_cone
from .program import ProgramBuilder
from .solver import SolveStatus, SolverSettings, solve

__all__ = [
    "EmptySetError",
    "UnboundedSetError",
    "emit_support_constraint",
    "support_value",
]


class EmptySetError(ValueError):
    """The set turned out to be empty at solve time."""


class UnboundedSetError(ValueError):
    """The set is unbounded in the queried direction."""

    def __init__(self, msg, certificate=None):
        super().__init__(msg)
        self.certificate = certificate


def _dual_membership_blocks(pb, rep, nu):
    """Adds nu in K* rows; zero-cone components of K leave nu free."""
    pos = 0
    for c in rep.cones:
        if c.kind == ConeKind.ZERO:
            pos += c.dim
            continue
        dual = dual_cone(c)
        rows = [([(nu[pos + i], 1.0)], 0.0) for i in range(c.dim)]
        pb.add_block(dual, rows)
        pos += c.dim


def emit_support_constraint(pb, rep, direction, bound, tag):
    """Emits the dual system for S_C(direction) <= bound into the builder.

    direction: list of (column, coefficient) terms describing a linear
        expression of length rep.dim, given as per-coordinate term lists.
    bound: (terms, const) linear scalar expression t.
    tag: unique name for the fresh dual variable block.

    The block is satisfiable for given (direction value, t) iff
    S_C(direction) <= t, assuming C compact and nonempty.
    """
    m = sum(c.dim for c in rep.cones)
    nu = pb.add_var(tag, m)
    Fc = rep.F.tocoo()
    Gc = rep.G.tocoo()

    # F^T nu + theta_expr = 0   (zero cone, d rows)
    coord_terms = [list(direction[j]) for j in range(rep.dim)]
    for r, c, v in zip(Fc.row, Fc.col, Fc.data):
        coord_terms[c].append((nu[r], v))
    pb.add_block(Cone.zero(rep.dim), [(terms, 0.0) for terms in coord_terms])

    # G^T nu = 0
    if rep.aux_dim:
        aux_terms = [[] for _ in range(rep.aux_dim)]
        for r, c, v in zip(Gc.row, Gc.col, Gc.data):
            aux_terms[c].append((nu[r], v))
        pb.add_block(Cone.zero(rep.aux_dim), [(terms, 0.0) for terms in aux_terms])

    # bound - h^T nu >= 0
    t_terms, t_const = bound
    row = list(t_terms) + [
        (nu[i], -rep.h[i]) for i in range(m) if rep.h[i] != 0.0
    ]
    pb.add_block(Cone.nonneg(1), [(row, t_const)])

    _dual_membership_blocks(pb, rep, nu)
    return nu


def support_value(rep, direction, settings=None):
    """Numerical value of S_C(direction) via the small dual program."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (rep.dim,):
        raise ValueError(f"direction must have length {rep.dim}")
    m = sum(c.dim for c in rep.cones)
    pb = ProgramBuilder()
    nu = pb.add_var("nu", m)
    for i in range(m):
        if rep.h[i] != 0.0:
            pb.add_objective(nu[i], rep.h[i])

    Fc = rep.F.tocoo()
    coord_terms = [[] for _ in range(rep.dim)]
    for r, c, v in zip(Fc.row, Fc.col, Fc.data):
        coord_terms[c].append((nu[r], v))
    pb.add_block(
        Cone.zero(rep.dim),
        [(coord_terms[j], direction[j]) for j in range(rep.dim)],
    )
    if rep.aux_dim:
        Gc = rep.G.tocoo()
        aux_terms = [[] for _ in range(rep.aux_dim)]
        for r, c, v in zip(Gc.row, Gc.col, Gc.data):
            aux_terms[c].append((nu[r], v))
        pb.add_block(Cone.zero(rep.aux_dim), [(terms, 0.0) for terms in aux_terms])
    _dual_membership_blocks(pb, rep, nu)

    prog = pb.finalize()
    sol = solve(prog, settings or SolverSettings())
    if sol.status == SolveStatus.PRIMAL_INFEASIBLE:
        raise UnboundedSetError(
            "set is unbounded in the queried direction "
            "(dual support program infeasible)",
            certificate=sol.certificate,
        )
    if sol.status == SolveStatus.DUAL_INFEASIBLE:
        raise EmptySetError("set is empty (dual support program unbounded below)")
    if sol.status in (SolveStatus.ITERATION_LIMIT, SolveStatus.NUMERICAL_ERROR):
        raise RuntimeError(f"support-value solve failed with status {sol.status}")
    return sol.objective
