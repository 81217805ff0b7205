"""Embedded first-order conic solver.

ADMM operator splitting on the homogeneous self-dual embedding (SCS-style),
with Ruiz equilibration, over-relaxation, a single sparse factorization of
the quasi-definite KKT system, and a projected-gradient polishing pass.

The program convention is  min q^T w  s.t.  A w + b in K.  Internally this
is the standard splitting form  min c^T x,  Ahat x + s = bhat,  s in K
with  Ahat = -A, bhat = b, c = q.

Infeasibility certificates follow the program convention: a primal
infeasibility witness nu satisfies  A^T nu ~ 0,  b^T nu < 0,  nu in K*;
a dual infeasibility (unboundedness) witness w satisfies  A w in K,
q^T w < 0.
"""

import enum
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cones import dual_cone
from .kernels import ConeProjector
from .program import Certificate, Residuals, Solution, SolveStatus

__all__ = ["Scaling", "SolverSettings", "solve", "refine"]

_DENSE_CUTOFF = 400  # vars + rows below this: dense LU beats splu


class Scaling(enum.Enum):
    NONE = "none"
    RUIZ = "ruiz"


@dataclass(frozen=True)
class SolverSettings:
    eps_abs: float = 1e-8
    eps_rel: float = 1e-8
    max_iter: int = 200_000
    scaling: Scaling = Scaling.RUIZ
    ruiz_iters: int = 10
    time_limit: float | None = None
    seed: int = 0  # kept for interface stability; the method has no randomness
    alpha: float = 1.5  # over-relaxation
    check_every: int = 25
    polish: bool = True
    polish_iters: int = 40

    def __post_init__(self):
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def _block_row_norms(norms, cones):
    """Makes per-row scale factors uniform inside SOC/exp blocks."""
    out = norms.copy()
    pos = 0
    for c in cones:
        d = c.dim
        if d > 1 and c.kind.name in ("SOC", "EXP", "EXP_DUAL"):
            out[pos : pos + d] = norms[pos : pos + d].max()
        pos += d
    return out


def _ruiz(Ah, cones, iters):
    """Ruiz equilibration of Ah; returns (Ah_scaled, d_row, e_col)."""
    m, n = Ah.shape
    d = np.ones(m)
    e = np.ones(n)
    M = Ah.copy()
    for _ in range(iters):
        rn = np.abs(M).max(axis=1).toarray().ravel() if m else np.zeros(0)
        cn = np.abs(M).max(axis=0).toarray().ravel() if n else np.zeros(0)
        rn = _block_row_norms(rn, cones)
        rs = 1.0 / np.sqrt(np.maximum(rn, 1e-12))
        cs = 1.0 / np.sqrt(np.maximum(cn, 1e-12))
        M = sp.diags(rs) @ M @ sp.diags(cs)
        d *= rs
        e *= cs
    return M.tocsc(), d, e


class _KKTSolver:
    """Solves M z = w with M = [[I, Ah^T], [-Ah, I]] via one factorization."""

    def __init__(self, Ah):
        m, n = Ah.shape
        self.n = n
        self.m = m
        K = sp.bmat(
            [
                [sp.eye(n), Ah.T],
                [Ah, -sp.eye(m)],
            ],
            format="csc",
        )
        if n + m <= _DENSE_CUTOFF:
            self._lu = sla.lu_factor(K.toarray())
            self._dense = True
        else:
            self._lu = spla.splu(K)
            self._dense = False

    def solve(self, wx, wy):
        rhs = np.concatenate([wx, -wy])
        sol = sla.lu_solve(self._lu, rhs) if self._dense else self._lu.solve(rhs)
        return sol[: self.n], sol[self.n :]


def _recomputed_residuals(prog, x, y, proj_primal, proj_dual, AT=None):
    """Residuals recomputed from scratch in the program convention."""
    q, A, b = prog.q, prog.A, prog.b
    if AT is None:
        AT = A.T
    ax_b = A @ x + b
    rp_vec = ax_b - proj_primal(ax_b)
    rd_vec = AT @ y - q
    pobj = float(q @ x)
    dobj = float(-(b @ y))
    gap = abs(pobj - dobj)
    nb = float(np.linalg.norm(b))
    nq = float(np.linalg.norm(q))
    rp = float(np.linalg.norm(rp_vec))
    rd = float(np.linalg.norm(rd_vec))
    return Residuals(
        primal=rp,
        dual=rd,
        gap=gap,
        primal_rel=rp / (1.0 + nb),
        dual_rel=rd / (1.0 + nq),
        gap_rel=gap / (1.0 + abs(pobj) + abs(dobj)),
    )


def _trivial_solution(prog, settings):
    n = prog.num_vars
    x = np.zeros(n)
    if np.any(prog.q != 0):
        w = -prog.q / np.linalg.norm(prog.q)
        return Solution(
            status=SolveStatus.DUAL_INFEASIBLE,
            primal=x,
            dual=np.zeros(0),
            objective=0.0,
            residuals=Residuals(0, 0, 0, 0, 0, 0),
            certificate=Certificate(SolveStatus.DUAL_INFEASIBLE, w, 0.0),
        )
    return Solution(
        status=SolveStatus.OPTIMAL,
        primal=x,
        dual=np.zeros(0),
        objective=0.0,
        residuals=Residuals(0, 0, 0, 0, 0, 0),
    )


def solve(prog, settings=None):
    """Solves the conic program; deterministic for identical inputs."""
    settings = settings or SolverSettings()
    if prog.num_rows == 0:
        return _trivial_solution(prog, settings)

    q, A, b = prog.q, prog.A.tocsc(), prog.b
    AT = A.T.tocsc()
    n, m = prog.num_vars, prog.num_rows
    proj_primal = ConeProjector(prog.cones)
    proj_dual = ConeProjector([dual_cone(c) for c in prog.cones])

    # splitting form
    Ah = (-A).tocsc()
    if settings.scaling == Scaling.RUIZ:
        Ahs, drow, ecol = _ruiz(Ah, prog.cones, settings.ruiz_iters)
    else:
        Ahs, drow, ecol = Ah.tocsc(), np.ones(m), np.ones(n)
    bs = drow * b
    cs = ecol * q
    sigma = 1.0 / max(float(np.linalg.norm(bs)), 1e-6)
    rho = 1.0 / max(float(np.linalg.norm(cs)), 1e-6)
    bs = sigma * bs
    cs = rho * cs

    kkt = _KKTSolver(Ahs)
    gx, gy = kkt.solve(cs, bs)
    denom = 1.0 + float(cs @ gx + bs @ gy)

    u = np.zeros(n + m + 1)
    v = np.zeros(n + m + 1)
    u[-1] = 1.0
    v[-1] = 1.0
    alpha = settings.alpha
    eps_a, eps_r = settings.eps_abs, settings.eps_rel
    nb = float(np.linalg.norm(b))
    nq = float(np.linalg.norm(q))

    def unscale_x(xs):
        return ecol * xs / sigma

    def unscale_y(ys):
        return drow * ys / rho

    start = time.monotonic()
    status = SolveStatus.ITERATION_LIMIT
    cert = None
    it = 0
    for it in range(1, settings.max_iter + 1):
        w = u + v
        px, py = kkt.solve(w[:n], w[n : n + m])
        tau_t = (w[-1] + float(cs @ px + bs @ py)) / denom
        ut_x = px - gx * tau_t
        ut_y = py - gy * tau_t
        kx = alpha * ut_x + (1 - alpha) * u[:n]
        ky = alpha * ut_y + (1 - alpha) * u[n : n + m]
        kt = alpha * tau_t + (1 - alpha) * u[-1]
        u_new = np.empty_like(u)
        u_new[:n] = kx - v[:n]
        u_new[n : n + m] = proj_dual(ky - v[n : n + m])
        u_new[-1] = max(kt - v[-1], 0.0)
        v[:n] += u_new[:n] - kx
        v[n : n + m] += u_new[n : n + m] - ky
        v[-1] += u_new[-1] - kt
        u = u_new

        if it % settings.check_every != 0 and it != settings.max_iter:
            continue
        if not np.all(np.isfinite(u)):
            status = SolveStatus.NUMERICAL_ERROR
            break
        tau = u[-1]
        if tau > 1e-10:
            x = unscale_x(u[:n] / tau)
            y = unscale_y(u[n : n + m] / tau)
            res = _recomputed_residuals(prog, x, y, proj_primal, proj_dual, AT)
            pobj = float(q @ x)
            dobj = float(-(b @ y))
            ok_p = res.primal <= eps_a + eps_r * (1.0 + nb)
            ok_d = res.dual <= eps_a + eps_r * (1.0 + nq)
            ok_g = res.gap <= eps_a + eps_r * (1.0 + abs(pobj) + abs(dobj))
            if ok_p and ok_d and ok_g:
                status = SolveStatus.OPTIMAL
                break
        # certificate checks on the homogeneous iterate
        ydir = unscale_y(u[n : n + m])
        bty = float(b @ ydir)
        if bty < 0:
            wit = ydir / (-bty)
            cert_res = float(np.linalg.norm(AT @ wit))
            if cert_res <= eps_a * (1.0 + float(np.linalg.norm(wit))):
                status = SolveStatus.PRIMAL_INFEASIBLE
                cert = Certificate(status, wit, cert_res)
                break
        xdir = unscale_x(u[:n])
        qtx = float(q @ xdir)
        if qtx < 0:
            wit = xdir / (-qtx)
            aw = A @ wit
            cert_res = float(np.linalg.norm(aw - proj_primal(aw)))
            if cert_res <= eps_a * (1.0 + float(np.linalg.norm(wit))):
                status = SolveStatus.DUAL_INFEASIBLE
                cert = Certificate(status, wit, cert_res)
                break
        if settings.time_limit is not None:
            if time.monotonic() - start > settings.time_limit:
                status = SolveStatus.ITERATION_LIMIT
                break

    if status in (SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE):
        return Solution(
            status=status,
            primal=np.full(n, np.nan),
            dual=np.full(m, np.nan),
            objective=np.nan,
            residuals=Residuals(
                np.inf, np.inf, np.inf, np.inf, np.inf, np.inf
            ),
            iterations=it,
            certificate=cert,
        )

    tau = u[-1] if u[-1] > 1e-10 else 1.0
    x = unscale_x(u[:n] / tau)
    y = proj_dual(unscale_y(u[n : n + m] / tau))
    if status == SolveStatus.NUMERICAL_ERROR and not np.all(
        np.isfinite(np.concatenate([x, y]))
    ):
        x = np.zeros(n)
        y = proj_dual(np.zeros(m))
    sol = Solution(
        status=status,
        primal=x,
        dual=y,
        objective=float(q @ x),
        residuals=_recomputed_residuals(prog, x, y, proj_primal, proj_dual, AT),
        iterations=it,
    )
    if settings.polish and status in (
        SolveStatus.OPTIMAL,
        SolveStatus.ITERATION_LIMIT,
    ):
        sol = refine(prog, sol, iters=settings.polish_iters)
        if status == SolveStatus.ITERATION_LIMIT:
            # polishing may push the iterate over the line
            res, pobj, dobj = sol.residuals, sol.objective, float(-(b @ sol.dual))
            if (
                res.primal <= eps_a + eps_r * (1.0 + nb)
                and res.dual <= eps_a + eps_r * (1.0 + nq)
                and res.gap <= eps_a + eps_r * (1.0 + abs(pobj) + abs(dobj))
            ):
                sol = Solution(
                    status=SolveStatus.OPTIMAL,
                    primal=sol.primal,
                    dual=sol.dual,
                    objective=sol.objective,
                    residuals=sol.residuals,
                    iterations=sol.iterations,
                )
    return sol


def refine(prog, sol, iters=40):
    """Projected-gradient polish of the KKT residual; never worsens it.

    Minimizes 0.5*(||dist(Ax+b, K)||^2 + ||A^T y - q||^2 + gap^2) over x and
    y in K*, starting from the solution iterate, and returns the best
    iterate by maximum residual.
    """
    if sol.status not in (SolveStatus.OPTIMAL, SolveStatus.ITERATION_LIMIT):
        return sol
    if prog.num_rows == 0:
        return sol
    q, A, b = prog.q, prog.A, prog.b
    AT = A.T.tocsc()
    proj_primal = ConeProjector(prog.cones)
    proj_dual = ConeProjector([dual_cone(c) for c in prog.cones])

    def residuals(x, y):
        return _recomputed_residuals(prog, x, y, proj_primal, proj_dual, AT)

    x = sol.primal.copy()
    y = proj_dual(sol.dual.copy())
    best_x, best_y = x, y
    best_res = residuals(x, y)
    best_max = best_res.max_abs()

    step = 1.0
    for _ in range(iters):
        ax_b = A @ x + b
        rp = ax_b - proj_primal(ax_b)
        rd = AT @ y - q
        gap = float(q @ x + b @ y)
        gx = AT @ rp + gap * q
        gy = A @ rd + gap * b
        gn = float(np.linalg.norm(gx) ** 2 + np.linalg.norm(gy) ** 2)
        if gn == 0.0:
            break
        phi0 = 0.5 * (
            float(rp @ rp) + float(rd @ rd) + gap * gap
        )
        accepted = False
        for _bt in range(30):
            xn = x - step * gx
            yn = proj_dual(y - step * gy)
            axn = A @ xn + b
            rpn = axn - proj_primal(axn)
            rdn = AT @ yn - q
            gapn = float(q @ xn + b @ yn)
            phin = 0.5 * (
                float(rpn @ rpn) + float(rdn @ rdn) + gapn * gapn
            )
            if phin < phi0:
                x, y = xn, yn
                step *= 1.5
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        res = residuals(x, y)
        if res.max_abs() < best_max:
            best_x, best_y, best_res, best_max = x, y, res, res.max_abs()

    return Solution(
        status=sol.status,
        primal=best_x,
        dual=best_y,
        objective=float(q @ best_x),
        residuals=best_res,
        iterations=sol.iterations,
        certificate=sol.certificate,
    )
