"""The average vector field step

    (u1 - u0) / dt = int_0^1 f((1 - xi) u0 + xi u1) dxi,   f = D grad H,

with the integral evaluated term by term in closed form where possible.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .solve import ImplicitSolveConfig, Stepper
from .system import ContractViolation, add_matrices, eval_vector_field, to_dense
from .terms import AFFINE, GENERIC, POLYNOMIAL, TRIGONOMETRIC, gauss_points

AFFINE_MIDPOINT = "AffineMidpoint"
POLYNOMIAL_GAUSS = "PolynomialGauss"
TRIG_DIFFERENCE_QUOTIENT = "TrigDifferenceQuotient"
GENERIC_GAUSS = "GenericGauss"

DEFAULT_GENERIC_POINTS = 8


@dataclass(frozen=True)
class Strategy:
    kind: str
    points: int | None = None

    @property
    def exact(self):
        return self.kind != GENERIC_GAUSS


@dataclass(frozen=True)
class AveragedFieldPlan:
    """One evaluation strategy per term of the driving energy."""

    strategies: tuple

    @classmethod
    def for_monitor(cls, monitor, generic_points=DEFAULT_GENERIC_POINTS):
        out = []
        for t in monitor.terms:
            if t.kind == AFFINE:
                out.append(Strategy(AFFINE_MIDPOINT))
            elif t.kind == POLYNOMIAL:
                # Gauss with m points is exact up to degree 2m - 1
                out.append(Strategy(POLYNOMIAL_GAUSS, max(1, (t.degree + 2) // 2)))
            elif t.kind == TRIGONOMETRIC:
                out.append(Strategy(TRIG_DIFFERENCE_QUOTIENT))
            elif t.kind == GENERIC:
                out.append(Strategy(GENERIC_GAUSS, generic_points))
            else:
                raise ValueError(f"unknown term kind {t.kind!r}")
        return cls(tuple(out))


def make_plan(system, generic_points=DEFAULT_GENERIC_POINTS):
    return AveragedFieldPlan.for_monitor(system.driver, generic_points)


def _check_plan(monitor, plan):
    if len(plan.strategies) != len(monitor.terms):
        raise ContractViolation("plan does not match the energy's terms")


def averaged_gradient(monitor, plan, u0, u1):
    """``int_0^1 grad H((1 - xi) u0 + xi u1) dxi`` term by term."""
    _check_plan(monitor, plan)
    out = np.zeros(monitor.dim)
    for term, strat in zip(monitor.terms, plan.strategies):
        out += term.averaged_gradient(u0, u1, strat.points)
    return out


def averaged_hessian(monitor, plan, u0, u1):
    """``int_0^1 xi * hess H((1 - xi) u0 + xi u1) dxi``, the ``u1``-derivative of
    :func:`averaged_gradient`."""
    _check_plan(monitor, plan)
    return add_matrices(
        [t.averaged_hessian(u0, u1, s.points) for t, s in zip(monitor.terms, plan.strategies)]
    )


def averaged_field(system, plan, u0, u1):
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    if u0.shape != (system.dim,) or u1.shape != (system.dim,):
        raise ContractViolation(f"{system.name}: states must have length {system.dim}")
    return system.operator.apply(averaged_gradient(system.driver, plan, u0, u1))


def quadrature_averaged_field(system, u0, u1, points=64):
    """Reference value of the averaged field by plain Gauss quadrature of ``f``."""
    nodes, weights = gauss_points(points)
    out = np.zeros(system.dim)
    for xi, w in zip(nodes, weights):
        out += w * eval_vector_field(system, (1.0 - xi) * u0 + xi * u1)
    return out


def trig_difference_quotient(a, b):
    """``(cos b - cos a) / (b - a)`` as ``-sin((a+b)/2) sinc((b-a)/2)``.

    Falls back to the limit ``-sin(a)`` series branch when ``|b - a| <= 1e-8``.
    Accepts scalars or arrays.
    """
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    out = kernels.trig_dq(np.atleast_1d(np.asarray(a, dtype=float)), np.atleast_1d(np.asarray(b, dtype=float)))
    return float(out[0]) if scalar else out


class AvfScheme:
    name = "avf"

    def __init__(self, system, plan=None):
        self.system = system
        self.plan = make_plan(system) if plan is None else plan
        self.constant_jacobian = system.is_linear

    def vector_field(self, u):
        return self.system.operator.apply(self.system.driver.gradient(u))

    def rhs(self, u0, u1):
        return averaged_field(self.system, self.plan, u0, u1)

    def rhs_jacobian(self, u0, u1):
        op = self.system.operator
        h = averaged_hessian(self.system.driver, self.plan, u0, u1)
        return _scaled_product(op, h)


def _scaled_product(op, h):
    m = op.matrix
    if sp.issparse(m) and sp.issparse(h):
        return (op.scale * (m @ h)).tocsr()
    return op.scale * (to_dense(m) @ to_dense(h))


def avf_step(system, u_n, dt, cfg=ImplicitSolveConfig(), plan=None):
    """One AVF step; returns ``(u_next, SolveStats)``.

    Raises :class:`~avflab.solve.NonConvergence` when the implicit equation
    is not solved within ``cfg.max_iter`` iterations.
    """
    u_n = np.asarray(u_n, dtype=float)
    if u_n.shape != (system.dim,):
        raise ContractViolation(f"{system.name}: expected state of length {system.dim}")
    return Stepper(AvfScheme(system, plan), dt, cfg).step(u_n)
