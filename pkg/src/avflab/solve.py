"""Nonlinear solves for implicit one-step schemes."""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

FIXED_POINT = "fixed_point"
NEWTON = "newton"


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    def __init__(self, iterations, residual, message=""):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message or f"no convergence after {iterations} iterations (residual {residual:.3e})")


class SingularJacobian(SolverError):
    pass


@dataclass(frozen=True)
class ImplicitSolveConfig:
    method: str = NEWTON
    tol: float = 1e-12
    max_iter: int = 100
    # "euler" or "previous"; "auto" picks whichever has the smaller residual
    predictor: str = "auto"

    def __post_init__(self):
        if self.method not in (NEWTON, FIXED_POINT):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.predictor not in ("auto", "euler", "previous"):
            raise ValueError(f"unknown predictor {self.predictor!r}")


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    residual: float


def factorize(J):
    """Return a callable solving ``J x = r``."""
    if sp.issparse(J):
        try:
            lu = spla.splu(sp.csc_matrix(J))
        except RuntimeError as exc:
            raise SingularJacobian(str(exc)) from exc
        return lu.solve
    J = np.asarray(J, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(J, check_finite=False)
    if np.any(np.diag(lu) == 0.0):
        raise SingularJacobian("exactly singular Jacobian")
    return lambda r: sla.lu_solve((lu, piv), r, check_finite=False)


def _fd_jacobian(residual, u, r0):
    n = u.size
    J = np.empty((n, n))
    for i in range(n):
        h = 1e-7 * max(1.0, abs(u[i]))
        e = u.copy()
        e[i] += h
        J[:, i] = (residual(e) - r0) / h
    return J


def _damped_update(residual, u, delta, res, halvings=12):
    """Full Newton step unless it raises the residual; then backtrack by halving."""
    lam = 1.0
    for _ in range(halvings + 1):
        v = u - lam * delta
        r = residual(v)
        new = float(np.max(np.abs(r))) if r.size else 0.0
        if new < res:
            return v, r, new
        lam *= 0.5
    # no decrease found: take the full step and let the iteration count decide
    v = u - delta
    r = residual(v)
    return v, r, float(np.max(np.abs(r))) if r.size else 0.0


def implicit_solve(residual, guess, cfg=ImplicitSolveConfig(), jacobian=None):
    """Find ``u`` with ``max|residual(u)| <= cfg.tol``.

    Newton uses ``jacobian(u)`` when given; it may return a matrix or an
    already factorized solve callable. Without it, a finite-difference
    Jacobian is formed. Fixed-point iteration uses ``u <- u - residual(u)``,
    the natural map for residuals of the form ``u - u_n - dt * F(u)``.
    """
    u = np.array(guess, dtype=float)
    r = residual(u)
    res = float(np.max(np.abs(r))) if r.size else 0.0
    first = res
    for it in range(cfg.max_iter + 1):
        if not np.isfinite(res):
            raise NonConvergence(it, res, f"residual became non-finite after {it} iterations")
        if res <= cfg.tol:
            return u, SolveStats(it, res)
        if it == cfg.max_iter:
            break
        if cfg.method == FIXED_POINT:
            if res > 1e12 * max(first, 1.0):
                raise NonConvergence(it, res, f"fixed-point iteration diverged (residual {res:.3e})")
            u = u - r
        else:
            J = jacobian(u) if jacobian is not None else _fd_jacobian(residual, u, r)
            solve = J if callable(J) else factorize(J)
            delta = solve(r)
            if not np.all(np.isfinite(delta)):
                raise SingularJacobian("Newton update is not finite")
            u, r, res = _damped_update(residual, u, delta, res)
            continue
        r = residual(u)
        res = float(np.max(np.abs(r))) if r.size else 0.0
    raise NonConvergence(cfg.max_iter, res)


class Stepper:
    """Advance ``u_{n+1} - u_n = dt * F(u_n, u_{n+1})`` for one scheme.

    ``scheme`` provides ``rhs(u0, u1)``, ``rhs_jacobian(u0, u1)`` (derivative
    in ``u1``), ``vector_field(u)`` for the predictor and
    ``constant_jacobian``. When the Jacobian is constant the factorization of
    ``I - dt * dF/du1`` is computed once and reused.
    """

    def __init__(self, scheme, dt, cfg=ImplicitSolveConfig()):
        dt = float(dt)
        if dt == 0.0 or not np.isfinite(dt):
            raise ValueError(f"dt must be finite and nonzero, got {dt}")
        self.scheme = scheme
        self.dt = dt
        self.cfg = cfg
        self._solve = None

    def _newton_matrix(self, u0, u1):
        dF = self.scheme.rhs_jacobian(u0, u1)
        n = u0.size
        if sp.issparse(dF):
            return (sp.identity(n, format="csc") - self.dt * dF).tocsc()
        return np.eye(n) - self.dt * dF

    def step(self, u0):
        u0 = np.asarray(u0, dtype=float)
        dt = self.dt

        def residual(u1):
            return u1 - u0 - dt * self.scheme.rhs(u0, u1)

        guess = u0
        if self.cfg.predictor != "previous":
            euler = u0 + dt * self.scheme.vector_field(u0)
            if self.cfg.predictor == "euler":
                guess = euler
            else:
                r_prev = np.max(np.abs(residual(u0)))
                r_euler = np.max(np.abs(residual(euler)))
                guess = euler if r_euler <= r_prev else u0

        jac = None
        if self.cfg.method == NEWTON:
            if self.scheme.constant_jacobian:
                if self._solve is None:
                    self._solve = factorize(self._newton_matrix(u0, u0))
                solver = self._solve

                def jac(u1):
                    return solver
            else:

                def jac(u1):
                    return self._newton_matrix(u0, u1)

        return implicit_solve(residual, guess, self.cfg, jacobian=jac)
