"""Energy drift, Lyapunov monotonicity, global error and observed order."""
from dataclasses import dataclass

import numpy as np

from .integrators import integrate, reference_solution
from .solve import ImplicitSolveConfig
from .trajectory import Trajectory, record  # noqa: F401  (re-exported)
from .zoo import build_problem, initial_condition


class UnreliableEstimate(ValueError):
    """Errors sit at the roundoff floor, so no convergence rate can be read off."""


@dataclass(frozen=True)
class EnergyDrift:
    """``absolute`` is in ``H_bar * dx`` units; ``relative`` is ``(H_n - H_0)/|H_0|``."""

    absolute: np.ndarray
    relative: np.ndarray

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.absolute)))

    @property
    def max_rel(self):
        return float(np.max(np.abs(self.relative)))


def energy_drift(traj, monitor):
    if monitor not in traj.energies:
        raise KeyError(f"monitor {monitor!r} not recorded; have {sorted(traj.energies)}")
    h = np.asarray(traj.energies[monitor], dtype=float)
    diff = h - h[0]
    # an initial energy of exactly zero leaves only the absolute drift meaningful
    denom = abs(h[0]) if h[0] != 0.0 else 1.0
    return EnergyDrift(diff * traj.dx_volumes[monitor], diff / denom)


@dataclass(frozen=True)
class MonotonicityVerdict:
    passed: bool
    index: int | None = None
    magnitude: float = 0.0

    def __bool__(self):
        return self.passed


def monotonicity_verdict(series, slack=0.0):
    """Pass iff every forward difference of ``series`` is ``<= slack``.

    On failure ``index`` is the first ``n`` with ``series[n+1] - series[n] >
    slack`` and ``magnitude`` that increment.
    """
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    d = np.diff(np.asarray(series, dtype=float))
    bad = np.flatnonzero(d > slack)
    if bad.size == 0:
        return MonotonicityVerdict(True)
    i = int(bad[0])
    return MonotonicityVerdict(False, i, float(d[i]))


def _l2(diff, dx):
    return np.sqrt(dx * np.sum(diff * diff, axis=-1))


def global_error(traj, ref, dx=None):
    """Scaled discrete L2 distance ``sqrt(dx * sum |u - ref|^2)`` per recorded time.

    ``dx`` defaults to the cell volume stored with the trajectory.
    """
    if traj.states.shape != ref.states.shape:
        raise ValueError(f"layout mismatch: {traj.states.shape} vs {ref.states.shape}")
    if not np.allclose(traj.times, ref.times, rtol=1e-12, atol=1e-12):
        raise ValueError("time grids differ")
    if dx is None:
        dx = traj.metadata.get("dx_volume", 1.0)
    return _l2(traj.states - ref.states, dx)


def observed_order(spec, scheme, dts, t_end, cfg=ImplicitSolveConfig(), ref_tol=1e-12, u0=None,
                   floor=1e-12, return_errors=False):
    """Least-squares slope of ``log(error at t_end)`` against ``log(dt)``.

    The error is measured against :func:`reference_solution` at ``ref_tol``.
    Raises :class:`UnreliableEstimate` when any error is below ``floor``.
    """
    dts = [float(d) for d in dts]
    if len(dts) < 3:
        raise ValueError("need at least three step sizes")
    for a, b in zip(dts, dts[1:]):
        if not np.isclose(b, a / 2, rtol=1e-12):
            raise ValueError("step sizes must halve successively")
    steps = []
    for d in dts:
        n = int(round(t_end / d))
        if not np.isclose(n * d, t_end, rtol=1e-10):
            raise ValueError(f"t_end={t_end} is not a multiple of dt={d}")
        steps.append(n)

    system = build_problem(spec)
    u0 = initial_condition(spec, system) if u0 is None else np.asarray(u0, dtype=float)
    ref = reference_solution(system, u0, [0.0, t_end], tol=ref_tol).final_state
    dx = system.driver.dx_volume
    errors = []
    for d, n in zip(dts, steps):
        traj = integrate(system, u0, scheme, d, n, cfg, record_every=n)
        errors.append(float(_l2(traj.final_state - ref, dx)))
    errors = np.array(errors)
    if np.any(errors < floor):
        raise UnreliableEstimate(f"errors {errors} reach the {floor:g} floor")
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return (slope, errors) if return_errors else slope
