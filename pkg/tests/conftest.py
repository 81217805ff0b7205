"""Shared constructors for solver test instances.

The generators here build conic programs whose optimal values (or
infeasibility witnesses) are known by construction, without solving
anything: pick the solution first, then manufacture the data around it.
"""

import numpy as np
import scipy.sparse as sp

from rerm.cones import Cone, ConeKind, dual_cone, project
from rerm.program import ConicProgram


def random_cone_list(rng, m_target, kinds=("zero", "nonneg", "soc", "exp")):
    """A product of cones with total dimension close to m_target."""
    cones = []
    m = 0
    while m < m_target:
        kind = kinds[rng.integers(len(kinds))]
        if kind == "zero":
            c = Cone.zero(int(rng.integers(1, 5)))
        elif kind == "nonneg":
            c = Cone.nonneg(int(rng.integers(1, 6)))
        elif kind == "soc":
            c = Cone.soc(int(rng.integers(2, 7)))
        else:
            c = Cone.exp()
        cones.append(c)
        m += c.dim
    return tuple(cones)


def _product_project(cones, z):
    out = np.empty_like(z)
    pos = 0
    for c in cones:
        out[pos : pos + c.dim] = project(c, z[pos : pos + c.dim])
        pos += c.dim
    return out


def make_optimal_instance(rng, n, cones, density=0.4):
    """Program with a known optimal point, built from KKT conditions.

    Draw z and split it into s = P_K(z), y = s - z (so y is in K* and
    s^T y = 0), pick a primal point w, and back out b and q so that
    (w, y, s) satisfies the optimality system.  Returns
    (program, w, y, optimal_objective).
    """
    m = sum(c.dim for c in cones)
    A = sp.random(m, n, density=density, random_state=np.random.RandomState(
        int(rng.integers(2**31))), format="csc")
    A = A + 0.1 * sp.eye(m, n, format="csc")  # keep rows from vanishing
    z = rng.normal(size=m)
    s = _product_project(cones, z)
    y = s - z
    w = rng.normal(size=n)
    b = s - A @ w
    q = A.T @ y
    prog = ConicProgram(q=q, A=A.tocsc(), b=b, cones=tuple(cones),
                        names={"w": (0, n)})
    return prog, w, y, float(q @ w)


def make_primal_infeasible(rng, n, cones):
    """Program with a constructed infeasibility witness nu.

    nu = P_{K*}(random) with A^T nu = 0 and b^T nu < 0; any feasible w
    would give nu^T (A w + b) = b^T nu < 0 against nu in K*.
    """
    m = sum(c.dim for c in cones)
    duals = [dual_cone(c) for c in cones]
    while True:
        nu = _product_project(duals, rng.normal(size=m))
        if np.linalg.norm(nu) > 1e-6:
            break
    A0 = rng.normal(size=(m, n)) * (rng.random(size=(m, n)) < 0.5)
    A = A0 - np.outer(nu, nu @ A0) / float(nu @ nu)
    b0 = rng.normal(size=m)
    b = b0 - ((b0 @ nu) + 1.0) * nu / float(nu @ nu)
    assert b @ nu < 0
    q = rng.normal(size=n)
    prog = ConicProgram(q=q, A=sp.csc_matrix(A), b=b, cones=tuple(cones),
                        names={"w": (0, n)})
    return prog, nu


def make_dual_infeasible(rng, n, cones):
    """Feasible program that is unbounded below, with witness direction w0:
    A w0 in K and q^T w0 < 0."""
    m = sum(c.dim for c in cones)
    w0 = rng.normal(size=n)
    A0 = rng.normal(size=(m, n)) * (rng.random(size=(m, n)) < 0.5)
    r = A0 @ w0
    s = _product_project(cones, r)
    A = A0 + np.outer(s - r, w0) / float(w0 @ w0)
    q0 = rng.normal(size=n)
    q = q0 - ((q0 @ w0) + 1.0) * w0 / float(w0 @ w0)
    assert q @ w0 < 0
    # keep the primal feasible so unboundedness is the only outcome
    w1 = rng.normal(size=n)
    b = _product_project(cones, rng.normal(size=m)) - A @ w1
    prog = ConicProgram(q=q, A=sp.csc_matrix(A), b=b, cones=tuple(cones),
                        names={"w": (0, n)})
    return prog, w0
