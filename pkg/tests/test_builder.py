import numpy as np
import pytest

from rerm.builder import (
    RermError,
    RermProblem,
    build,
    build_analytical_ball,
    solve_rerm,
    worst_case_loss,
)
from rerm.losses import LossKind, LossSpec
from rerm.sets import AffineIneq, Box, FixCoords, NormBall, SetExpr
from rerm.solver import SolverSettings

TIGHT = SolverSettings(eps_abs=1e-9, eps_rel=1e-9)


def _singleton_sets(X):
    return tuple(SetExpr(X.shape[1], (FixCoords(x),)) for x in X)


def test_erm_collapse_to_least_squares():
    rng = np.random.default_rng(51)
    X = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    prob = RermProblem(X, y, _singleton_sets(X), LossSpec(LossKind.PNORM, p=2))
    sol = solve_rerm(prob, TIGHT)
    theta_ols = np.linalg.lstsq(X, y, rcond=None)[0]
    assert np.abs(sol.theta - theta_ols).max() <= 1e-5
    assert sol.objective == pytest.approx(
        float(((X @ theta_ols - y) ** 2).sum()), rel=1e-5
    )


@pytest.mark.parametrize(
    "loss",
    [
        LossSpec(LossKind.PNORM, p=1),
        LossSpec(LossKind.PNORM, p=2),
        LossSpec(LossKind.HUBER, delta=0.8),
        LossSpec(LossKind.HINGE),
        LossSpec(LossKind.LOGISTIC),
        LossSpec(LossKind.EXPONENTIAL),
    ],
    ids=lambda l: f"{l.kind.value}-p{l.p}",
)
def test_analytical_ball_agrees_with_general_build(loss):
    rng = np.random.default_rng(52)
    n, d = 5, 3
    X = rng.normal(size=(n, d))
    y = rng.normal(size=n)
    sets = tuple(
        SetExpr(d, (NormBall(2, X[i], 0.2 + 0.3 * rng.random()),))
        for i in range(n)
    )
    prob = RermProblem(X, y, sets, loss)
    from rerm.solver import solve

    obj_gen = solve(build(prob), TIGHT).objective
    obj_ana = solve(build_analytical_ball(prob), TIGHT).objective
    assert obj_ana == pytest.approx(obj_gen, rel=1e-6, abs=1e-7)


def test_solve_rerm_picks_analytical_path_consistently():
    rng = np.random.default_rng(53)
    X = rng.normal(size=(4, 2))
    y = rng.normal(size=4)
    sets = tuple(SetExpr(2, (NormBall(2, X[i], 0.3),)) for i in range(4))
    prob = RermProblem(X, y, sets, LossSpec(LossKind.PNORM, p=2))
    auto = solve_rerm(prob, TIGHT)  # plain balls: auto = analytical
    general = solve_rerm(prob, TIGHT, analytical=False)
    assert auto.objective == pytest.approx(general.objective, rel=1e-6)
    np.testing.assert_allclose(auto.theta, general.theta, atol=1e-5)


def test_objective_equals_sum_of_per_point_losses():
    rng = np.random.default_rng(54)
    X = rng.normal(size=(6, 2))
    y = rng.normal(size=6)
    sets = tuple(
        SetExpr(2, (Box(X[i] - 0.2, X[i] + 0.2),)) for i in range(6)
    )
    prob = RermProblem(X, y, sets, LossSpec(LossKind.HUBER, delta=1.0))
    sol = solve_rerm(prob, TIGHT)
    assert sol.objective == pytest.approx(
        float(sol.per_point_losses.sum()), abs=1e-6
    )
    # and the solution is certified by independent worst-case evaluation
    wc = sum(
        worst_case_loss(sol.theta, s, y[i], prob.loss)
        for i, s in enumerate(sets)
    )
    assert sol.objective == pytest.approx(wc, abs=1e-5)


def test_robustness_never_beats_nominal_objective():
    rng = np.random.default_rng(55)
    X = rng.normal(size=(8, 2))
    y = rng.normal(size=8)
    nominal = solve_rerm(
        RermProblem(X, y, _singleton_sets(X), LossSpec(LossKind.PNORM, p=2)), TIGHT
    )
    robust = solve_rerm(
        RermProblem(
            X, y,
            tuple(SetExpr(2, (Box(X[i] - 0.3, X[i] + 0.3),)) for i in range(8)),
            LossSpec(LossKind.PNORM, p=2),
        ),
        TIGHT,
    )
    assert robust.objective >= nominal.objective - 1e-7


def test_theta_constraints_bind():
    rng = np.random.default_rng(56)
    X = rng.normal(size=(15, 2))
    theta_true = np.array([2.0, -1.0])
    y = X @ theta_true
    cap = SetExpr(2, (Box(np.array([-0.5, -0.5]), np.array([0.5, 0.5])),))
    prob = RermProblem(
        X, y, _singleton_sets(X), LossSpec(LossKind.PNORM, p=2),
        theta_constraints=cap,
    )
    sol = solve_rerm(prob, TIGHT)
    assert np.all(np.abs(sol.theta) <= 0.5 + 1e-6)
    free = solve_rerm(
        RermProblem(X, y, _singleton_sets(X), LossSpec(LossKind.PNORM, p=2)), TIGHT
    )
    assert sol.objective >= free.objective - 1e-8


def test_unbounded_set_is_attributed():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.zeros(2)
    half = SetExpr(2, (AffineIneq(np.array([[0.0, -1.0]]), np.array([0.0])),))
    ok = SetExpr(2, (FixCoords(X[0]),))
    # theta = 0 would make the half-plane support finite; pin it away
    pin = SetExpr(2, (FixCoords(np.array([1.0, 1.0])),))
    prob = RermProblem(
        X, y, (ok, half), LossSpec(LossKind.PNORM, p=2), theta_constraints=pin
    )
    with pytest.raises(RermError) as exc:
        solve_rerm(prob, SolverSettings(eps_abs=1e-7, eps_rel=1e-7))
    assert exc.value.datapoint == 1


def test_problem_validation():
    X = np.zeros((2, 2))
    with pytest.raises(ValueError):
        RermProblem(X, np.zeros(3), _singleton_sets(X), LossSpec(LossKind.PNORM))
    with pytest.raises(ValueError):
        RermProblem(
            X, np.zeros(2),
            (SetExpr(3, ()), SetExpr(3, ())), LossSpec(LossKind.PNORM),
        )


def test_worst_case_loss_hinge_uses_infimum_side():
    # hinge worst case over a box: loss at the minimal margin corner
    s = SetExpr(2, (Box(np.array([0.0, 0.0]), np.array([1.0, 1.0])),))
    theta = np.array([1.0, 2.0])
    loss = LossSpec(LossKind.HINGE)
    # inf over the box of x^T theta is 0 at the origin; y = 0
    assert worst_case_loss(theta, s, 0.0, loss) == pytest.approx(1.0, abs=1e-6)
