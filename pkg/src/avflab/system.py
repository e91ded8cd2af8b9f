"""Skew-gradient and dissipative-gradient systems ``u' = D grad H(u)``."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp


class ContractViolation(ValueError):
    """An operation was called with arguments outside its contract."""


class StructureClass(Enum):
    SKEW = "skew"
    NEGATIVE_SEMIDEFINITE = "negative_semidefinite"


def to_dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m, dtype=float)


def add_matrices(mats):
    """Sum dense and sparse matrices; the result is dense if any input is."""
    mats = [m for m in mats if m is not None]
    if not mats:
        return None
    if any(not sp.issparse(m) for m in mats):
        out = np.zeros(mats[0].shape)
        for m in mats:
            out += to_dense(m)
        return out
    out = mats[0].tocsr()
    for m in mats[1:]:
        out = out + m
    return out.tocsr()


@dataclass(frozen=True, eq=False)
class StructureOperator:
    """Constant matrix ``scale * matrix`` with a declared structural class.

    Keeping integer stencils in ``matrix`` and the grid factor in ``scale``
    makes the skew check exact for finite-difference constructions.
    ``cls`` is ``None`` for rectangular building blocks.
    """

    matrix: object
    cls: StructureClass | None
    scale: float = 1.0
    name: str = ""

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, v):
        return self.scale * np.asarray(self.matrix @ v, dtype=float)

    def assembled(self):
        return self.scale * self.matrix


@dataclass(frozen=True, eq=False)
class EnergyMonitor:
    """A named discrete energy ``H_bar`` as a sum of terms.

    ``dx_volume`` is the cell volume used only to report ``H_bar * dx``.
    """

    name: str
    terms: tuple
    dim: int
    dx_volume: float = 1.0

    def __post_init__(self):
        if not self.dx_volume > 0:
            raise ContractViolation(f"dx_volume must be positive, got {self.dx_volume}")
        for t in self.terms:
            if t.dim != self.dim:
                raise ContractViolation(f"term of dim {t.dim} in monitor of dim {self.dim}")

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise ContractViolation(f"{self.name}: expected state of length {self.dim}, got {u.shape}")
        return u

    def energy(self, u):
        u = self._check(u)
        return float(sum(t.energy(u) for t in self.terms))

    def gradient(self, u):
        u = self._check(u)
        g = np.zeros(self.dim)
        for t in self.terms:
            g += t.gradient(u)
        return g

    def hessian(self, u):
        u = self._check(u)
        return add_matrices([t.hessian(u) for t in self.terms])

    @property
    def is_quadratic(self):
        return all(t.kind == "affine" for t in self.terms)

    def term_kinds(self):
        return [t.describe() for t in self.terms]


@dataclass(frozen=True)
class StateLayout:
    """How the flat state vector maps onto grid fields.

    ``kind`` is one of ``ScalarField1D``, ``StackedPair``, ``Field3D`` or
    ``TensorPair2D``; ``field_shapes`` gives the array shape of every stored
    field in order, ``spacing`` the grid step per axis.
    """

    kind: str
    fields: tuple
    field_shapes: tuple
    spacing: tuple
    origin: tuple
    boundary: str = "periodic"

    @property
    def size(self):
        return int(sum(int(np.prod(s)) for s in self.field_shapes))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def split(self, u):
        out, start = {}, 0
        for name, shape in zip(self.fields, self.field_shapes):
            n = int(np.prod(shape))
            out[name] = np.asarray(u[start : start + n]).reshape(shape)
            start += n
        return out


@dataclass(frozen=True, eq=False)
class SemiDiscreteSystem:
    """``u' = operator @ driver.gradient(u)`` plus monitors and grid metadata.

    ``aux_operators`` maps an auxiliary monitor name to the structure
    operator of an alternative formulation (bi-Hamiltonian systems).
    """

    name: str
    operator: StructureOperator
    driver: EnergyMonitor
    layout: StateLayout
    aux_monitors: tuple = ()
    aux_operators: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        k = self.driver.dim
        if self.operator.shape != (k, k):
            raise ContractViolation(f"operator shape {self.operator.shape} does not match dim {k}")
        for m in self.aux_monitors:
            if m.dim != k:
                raise ContractViolation(f"aux monitor {m.name} has dim {m.dim}, expected {k}")
        if self.layout.size != k:
            raise ContractViolation(f"layout holds {self.layout.size} unknowns, system has {k}")

    @property
    def dim(self):
        return self.driver.dim

    @property
    def monitors(self):
        return (self.driver,) + tuple(self.aux_monitors)

    def monitor(self, name):
        for m in self.monitors:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def is_linear(self):
        return self.driver.is_quadratic

    @property
    def conservative(self):
        return self.operator.cls is StructureClass.SKEW

    def jacobian(self, u):
        """Jacobian of the vector field, ``scale * M @ hess H(u)``."""
        h = self.driver.hessian(u)
        m = self.operator.matrix
        if sp.issparse(m) and sp.issparse(h):
            return (self.operator.scale * (m @ h)).tocsr()
        return self.operator.scale * (to_dense(m) @ to_dense(h))


def eval_vector_field(system, u):
    """``f(u) = D grad H(u)`` for the driving energy."""
    u = np.asarray(u, dtype=float)
    if u.shape != (system.dim,):
        raise ContractViolation(f"{system.name}: expected state of length {system.dim}, got {u.shape}")
    return system.operator.apply(system.driver.gradient(u))


def energy_and_gradient(monitor, u):
    return monitor.energy(u), monitor.gradient(u)


@dataclass(frozen=True)
class StructureVerdict:
    passed: bool
    cls: StructureClass
    worst: float = 0.0
    probe: np.ndarray | None = None
    message: str = ""

    def __bool__(self):
        return self.passed


def _is_integer_matrix(m):
    data = m.data if sp.issparse(m) else np.asarray(m)
    return bool(np.all(np.isfinite(data)) and np.all(data == np.round(data)))


def check_structure(op, probes=100, rng=None):
    """Verify the declared class of ``op`` (skew or negative semidefinite).

    Skew: ``max|M + M^T|`` must vanish exactly for integer stencils and stay
    below ``1e-14 max|M|`` otherwise. Negative semidefinite: ``x^T M x <=
    1e-12 |x|^2 max|M|`` on ``probes`` random vectors, plus an eigenvalue
    check of the symmetric part when the matrix is small enough to densify.
    """
    m = op.matrix
    if op.cls is None:
        raise ContractViolation("operator has no declared structure class")
    if m.shape[0] != m.shape[1]:
        return StructureVerdict(False, op.cls, np.inf, None, f"not square: {m.shape}")
    mmax = float(abs(m).max()) if m.shape[0] else 0.0

    if op.cls is StructureClass.SKEW:
        sym = m + m.T
        worst = float(abs(sym).max()) if sym.shape[0] else 0.0
        bound = 0.0 if _is_integer_matrix(m) else 1e-14 * mmax
        ok = worst <= bound
        return StructureVerdict(ok, op.cls, worst, None, "" if ok else f"max|M+M^T| = {worst:.3e} > {bound:.3e}")

    rng = np.random.default_rng(0) if rng is None else rng
    n = m.shape[0]
    worst, worst_probe = -np.inf, None
    for _ in range(probes):
        x = rng.standard_normal(n)
        q = float(x @ (m @ x)) / float(x @ x)
        if q > worst:
            worst, worst_probe = q, x
    if n <= 1500:
        dense = to_dense(m)
        evals, evecs = np.linalg.eigh(0.5 * (dense + dense.T))
        if evals[-1] > worst:
            worst, worst_probe = float(evals[-1]), evecs[:, -1]
    bound = 1e-12 * mmax
    ok = worst <= bound
    return StructureVerdict(ok, op.cls, worst, None if ok else worst_probe, "" if ok else f"x^T M x / |x|^2 = {worst:.3e} > {bound:.3e}")
