import math

import numpy as np
import pytest

from rerm.cones import Cone
from rerm.program import ProgramBuilder
from rerm.sets import (
    AffineEq,
    AffineIneq,
    Box,
    NormBall,
    SetExpr,
    canonicalize,
    intersect,
)
from rerm.solver import SolverSettings, solve
from rerm.support import (
    EmptySetError,
    UnboundedSetError,
    emit_support_constraint,
    support_value,
)

TIGHT = SolverSettings(eps_abs=1e-9, eps_rel=1e-9)


def _simplex(d):
    return SetExpr(
        d,
        (
            AffineIneq(-np.eye(d), np.zeros(d)),
            AffineEq(np.ones((1, d)), np.array([1.0])),
        ),
    )


def test_simplex_support_is_max_coordinate():
    rep = canonicalize(_simplex(4))
    rng = np.random.default_rng(21)
    for _ in range(15):
        theta = rng.normal(size=4)
        assert support_value(rep, theta, TIGHT) == pytest.approx(
            theta.max(), abs=1e-6
        )


def test_euclidean_ball_support():
    # S(theta) = c^T theta + rho * ||theta||
    c = np.array([0.3, -1.0, 0.5])
    rho = 0.8
    rep = canonicalize(SetExpr(3, (NormBall(2, c, rho),)))
    rng = np.random.default_rng(22)
    for _ in range(15):
        theta = rng.normal(size=3)
        expect = float(c @ theta) + rho * float(np.linalg.norm(theta))
        assert support_value(rep, theta, TIGHT) == pytest.approx(expect, abs=1e-6)


def test_l1_and_linf_ball_support():
    c = np.array([0.2, -0.4])
    rep1 = canonicalize(SetExpr(2, (NormBall(1, c, 1.5),)))
    repi = canonicalize(SetExpr(2, (NormBall(math.inf, c, 1.5),)))
    rng = np.random.default_rng(23)
    for _ in range(10):
        theta = rng.normal(size=2)
        assert support_value(rep1, theta, TIGHT) == pytest.approx(
            float(c @ theta) + 1.5 * np.abs(theta).max(), abs=1e-6
        )
        assert support_value(repi, theta, TIGHT) == pytest.approx(
            float(c @ theta) + 1.5 * np.abs(theta).sum(), abs=1e-6
        )


def test_box_support():
    l = np.array([-1.0, 0.5, -2.0])
    u = np.array([1.0, 2.0, -0.5])
    rep = canonicalize(SetExpr(3, (Box(l, u),)))
    rng = np.random.default_rng(24)
    for _ in range(10):
        theta = rng.normal(size=3)
        expect = float(np.maximum(l * theta, u * theta).sum())
        assert support_value(rep, theta, TIGHT) == pytest.approx(expect, abs=1e-6)


def test_positive_homogeneity_and_subadditivity():
    rep = canonicalize(
        SetExpr(
            2,
            (
                Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0])),
                NormBall(2, np.array([0.2, 0.1]), 0.9),
            ),
        )
    )
    rng = np.random.default_rng(25)
    for _ in range(8):
        t1, t2 = rng.normal(size=2), rng.normal(size=2)
        s1 = support_value(rep, t1, TIGHT)
        s2 = support_value(rep, t2, TIGHT)
        assert support_value(rep, 2.5 * t1, TIGHT) == pytest.approx(
            2.5 * s1, abs=1e-6
        )
        assert support_value(rep, t1 + t2, TIGHT) <= s1 + s2 + 1e-6


def test_inclusion_shrinks_support():
    big = SetExpr(2, (NormBall(2, np.zeros(2), 1.0),))
    cut = SetExpr(2, (Box(np.array([-0.4, -0.4]), np.array([0.4, 0.4])),))
    small = intersect(big, cut)
    rep_big = canonicalize(big)
    rep_small = canonicalize(small)
    rng = np.random.default_rng(26)
    for _ in range(8):
        theta = rng.normal(size=2)
        assert support_value(rep_small, theta, TIGHT) <= (
            support_value(rep_big, theta, TIGHT) + 1e-6
        )


def test_unbounded_direction_raises():
    # upper half-plane: bounded below in x2 only
    s = SetExpr(2, (AffineIneq(np.array([[0.0, -1.0]]), np.array([0.0])),))
    rep = canonicalize(s)
    with pytest.raises(UnboundedSetError):
        support_value(rep, np.array([1.0, 0.0]), TIGHT)
    with pytest.raises(UnboundedSetError):
        support_value(rep, np.array([0.0, 1.0]), TIGHT)


def test_empty_set_raises():
    # x <= -1 and x >= 1 simultaneously
    s = SetExpr(1, (AffineIneq(np.array([[1.0], [-1.0]]), np.array([-1.0, -1.0])),))
    rep = canonicalize(s)
    with pytest.raises(EmptySetError):
        support_value(rep, np.array([1.0]), TIGHT)


def test_emit_support_constraint_reaches_the_support_value():
    # minimize t subject to S_C(theta0) <= t: optimum is S_C(theta0)
    l = np.array([-1.0, 0.0])
    u = np.array([2.0, 1.5])
    rep = canonicalize(SetExpr(2, (Box(l, u),)))
    theta0 = np.array([0.7, -1.3])
    pb = ProgramBuilder()
    theta = pb.add_var("theta", 2)
    (t,) = pb.add_var("t", 1)
    pb.add_objective(t, 1.0)
    pb.add_block(
        Cone.zero(2),
        [([(theta[j], 1.0)], -theta0[j]) for j in range(2)],
    )
    direction = [[(theta[j], 1.0)] for j in range(2)]
    emit_support_constraint(pb, rep, direction, ([(t, 1.0)], 0.0), tag="nu")
    sol = solve(pb.finalize(), TIGHT)
    expect = float(np.maximum(l * theta0, u * theta0).sum())
    assert sol.objective == pytest.approx(expect, abs=1e-6)


def test_direction_shape_is_checked():
    rep = canonicalize(SetExpr(2, (NormBall(2, np.zeros(2), 1.0),)))
    with pytest.raises(ValueError):
        support_value(rep, np.zeros(3), TIGHT)
