import math

import numpy as np
import pytest

from rerm.losses import LossKind, LossSpec, MonotoneClass, classification_transform
from rerm.program import ProgramBuilder
from rerm.cones import Cone
from rerm.solver import SolverSettings, solve

ALL = [
    LossSpec(LossKind.PNORM, p=1),
    LossSpec(LossKind.PNORM, p=2),
    LossSpec(LossKind.HUBER, delta=1.0),
    LossSpec(LossKind.HUBER, delta=0.4),
    LossSpec(LossKind.HINGE),
    LossSpec(LossKind.LOGISTIC),
    LossSpec(LossKind.EXPONENTIAL),
]


def test_known_values():
    huber = LossSpec(LossKind.HUBER, delta=1.0)
    assert huber.evaluate(2.0) == pytest.approx(1.5)
    assert huber.evaluate(0.5) == pytest.approx(0.125)
    assert huber.evaluate(-2.0) == pytest.approx(1.5)
    logistic = LossSpec(LossKind.LOGISTIC)
    assert logistic.evaluate(-1.0) == pytest.approx(math.log(1 + math.e))
    assert logistic.evaluate(0.0) == pytest.approx(math.log(2.0))
    assert LossSpec(LossKind.PNORM, p=2).evaluate(1.5) == pytest.approx(2.25)
    assert LossSpec(LossKind.PNORM, p=1).evaluate(-1.5) == pytest.approx(1.5)
    assert LossSpec(LossKind.HINGE).evaluate(0.3) == pytest.approx(0.7)
    assert LossSpec(LossKind.HINGE).evaluate(2.0) == 0.0
    assert LossSpec(LossKind.EXPONENTIAL).evaluate(1.0) == pytest.approx(
        math.exp(-1.0)
    )


def test_evaluate_accepts_arrays():
    z = np.array([-1.0, 0.0, 2.0])
    out = LossSpec(LossKind.HINGE).evaluate(z)
    np.testing.assert_allclose(out, [2.0, 1.0, 0.0])


def test_monotone_classes():
    assert LossSpec(LossKind.PNORM).monotone_class == MonotoneClass.EVEN_NONDECREASING
    assert LossSpec(LossKind.HUBER).monotone_class == MonotoneClass.EVEN_NONDECREASING
    for k in (LossKind.HINGE, LossKind.LOGISTIC, LossKind.EXPONENTIAL):
        assert LossSpec(k).monotone_class == MonotoneClass.NON_INCREASING


@pytest.mark.parametrize("loss", ALL, ids=lambda l: f"{l.kind.value}-p{l.p}-d{l.delta}")
def test_convexity_on_samples(loss):
    rng = np.random.default_rng(31)
    for _ in range(200):
        a, b = rng.normal(scale=3.0, size=2)
        lam = rng.random()
        mid = loss.evaluate(lam * a + (1 - lam) * b)
        assert mid <= lam * loss.evaluate(a) + (1 - lam) * loss.evaluate(b) + 1e-10


@pytest.mark.parametrize("loss", ALL, ids=lambda l: f"{l.kind.value}-p{l.p}-d{l.delta}")
def test_min_epigraph_c_matches_evaluate(loss):
    rng = np.random.default_rng(32)
    for z in rng.normal(scale=2.0, size=25):
        assert loss.min_epigraph_c(float(z)) == pytest.approx(
            loss.evaluate(float(z)), abs=2e-6
        )


@pytest.mark.parametrize("loss", ALL, ids=lambda l: f"{l.kind.value}-p{l.p}-d{l.delta}")
def test_epigraph_rows_solve_to_loss_value(loss):
    # minimize c subject to the epigraph rows with z pinned: optimum f(z0)
    rng = np.random.default_rng(33)
    for z0 in rng.normal(scale=1.5, size=4):
        pb = ProgramBuilder()
        (z,) = pb.add_var("z", 1)
        (c,) = pb.add_var("c", 1)
        pb.add_objective(c, 1.0)
        pb.add_block(Cone.zero(1), [([(z, 1.0)], -float(z0))])
        loss.emit_epigraph(pb, z, c, tag="pt0")
        sol = solve(pb.finalize(), SolverSettings(eps_abs=1e-9, eps_rel=1e-9))
        assert sol.objective == pytest.approx(
            loss.evaluate(float(z0)), abs=1e-6
        )


def test_loss_spec_validation():
    with pytest.raises(ValueError):
        LossSpec(LossKind.PNORM, p=3)
    with pytest.raises(ValueError):
        LossSpec(LossKind.HUBER, delta=0.0)


def test_classification_transform():
    X = np.array([[1.0, 2.0], [3.0, -1.0]])
    y = np.array([1, -1])
    Xt, yt = classification_transform(X, y)
    np.testing.assert_allclose(Xt, [[1.0, 2.0], [-3.0, 1.0]])
    np.testing.assert_allclose(yt, [0.0, 0.0])
    with pytest.raises(ValueError, match="offending rows \\[1\\]"):
        classification_transform(X, np.array([1, 0]))
