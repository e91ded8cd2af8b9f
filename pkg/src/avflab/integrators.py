"""Comparison schemes, a tight-tolerance reference solver and the time loop."""
import numpy as np
from scipy.integrate import solve_ivp

from .avf import AvfScheme
from .solve import ImplicitSolveConfig, SolverError, Stepper
from .system import ContractViolation, eval_vector_field
from .trajectory import record


class MidpointScheme:
    """``(u1 - u0)/dt = f((u0 + u1)/2)``."""

    name = "midpoint"

    def __init__(self, system):
        self.system = system
        self.constant_jacobian = system.is_linear

    def vector_field(self, u):
        return eval_vector_field(self.system, u)

    def rhs(self, u0, u1):
        return eval_vector_field(self.system, 0.5 * (u0 + u1))

    def rhs_jacobian(self, u0, u1):
        return 0.5 * self.system.jacobian(0.5 * (u0 + u1))


class BackwardEulerScheme:
    """``(u1 - u0)/dt = f(u1)``."""

    name = "backward_euler"

    def __init__(self, system):
        self.system = system
        self.constant_jacobian = system.is_linear

    def vector_field(self, u):
        return eval_vector_field(self.system, u)

    def rhs(self, u0, u1):
        return eval_vector_field(self.system, u1)

    def rhs_jacobian(self, u0, u1):
        return self.system.jacobian(u1)


IMPLICIT_SCHEMES = {
    "avf": AvfScheme,
    "midpoint": MidpointScheme,
    "backward_euler": BackwardEulerScheme,
}
SCHEMES = tuple(IMPLICIT_SCHEMES) + ("reference",)


def _check_state(system, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (system.dim,):
        raise ContractViolation(f"{system.name}: expected state of length {system.dim}")
    return u


def midpoint_step(system, u_n, dt, cfg=ImplicitSolveConfig()):
    return Stepper(MidpointScheme(system), dt, cfg).step(_check_state(system, u_n))


def backward_euler_step(system, u_n, dt, cfg=ImplicitSolveConfig()):
    return Stepper(BackwardEulerScheme(system), dt, cfg).step(_check_state(system, u_n))


class ReferenceSolveError(SolverError):
    pass


def reference_solution(system, u0, t_grid, tol=1e-12):
    """High-accuracy trajectory on ``t_grid`` from an adaptive 8(5,3) Runge-Kutta pair."""
    if tol < 1e-14:
        raise ContractViolation(f"tol must be >= 1e-14, got {tol}")
    u0 = _check_state(system, u0)
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) == 1:
        return record(system, t_grid, u0[None, :], [0], metadata={"scheme": "reference", "tol": tol})
    # absolute tolerance on the scale of the data, so small states still get tol relative accuracy
    scale = float(np.max(np.abs(u0)))
    atol = tol * scale if scale > 0 else tol
    sol = solve_ivp(
        lambda t, y: eval_vector_field(system, y),
        (t_grid[0], t_grid[-1]),
        u0,
        method="DOP853",
        t_eval=t_grid,
        rtol=tol,
        atol=atol,
    )
    if sol.status != 0:
        raise ReferenceSolveError(f"reference solve failed: {sol.message}")
    return record(
        system,
        sol.t,
        sol.y.T,
        np.arange(len(sol.t)),
        metadata={"scheme": "reference", "tol": tol, "nfev": int(sol.nfev)},
    )


def integrate(system, u0, scheme, dt, steps, cfg=ImplicitSolveConfig(), record_every=1, t0=0.0):
    """Run ``steps`` steps of ``scheme`` and record every ``record_every``-th state.

    The final state is always recorded. On a solver failure the exception
    gets a ``partial`` attribute holding the trajectory up to the last good
    step.
    """
    if steps < 0 or record_every < 1:
        raise ContractViolation("steps must be >= 0 and record_every >= 1")
    u = _check_state(system, u0)
    md = {"scheme": scheme, "dt": dt, "tol": cfg.tol, "method": cfg.method}
    if scheme == "reference":
        idx = [n for n in range(steps + 1) if n % record_every == 0 or n == steps]
        traj = reference_solution(system, u, t0 + dt * np.asarray(idx, dtype=float), tol=cfg.tol)
        traj.steps = np.asarray(idx)
        traj.metadata.update(md)
        return traj
    try:
        stepper = Stepper(IMPLICIT_SCHEMES[scheme](system), dt, cfg)
    except KeyError:
        raise ContractViolation(f"unknown scheme {scheme!r}; choose from {SCHEMES}") from None

    times, states, rec_steps, stats = [t0], [u.copy()], [0], []
    try:
        for n in range(1, steps + 1):
            u, st = stepper.step(u)
            stats.append(st)
            if n % record_every == 0 or n == steps:
                times.append(t0 + n * dt)
                states.append(u.copy())
                rec_steps.append(n)
    except SolverError as exc:
        exc.partial = record(system, times, states, rec_steps, stats, md)
        exc.failed_step = len(stats) + 1
        raise
    return record(system, times, states, rec_steps, stats, md)
