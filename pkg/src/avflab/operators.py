"""Constant spatial operators: finite differences, Fourier differentiation,
Gauss-Lobatto-Legendre element data and the periodic 3D curl."""
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .system import StructureClass, StructureOperator


class FdKind(Enum):
    PERIODIC_LAPLACIAN = "PeriodicLaplacian"
    PERIODIC_FIRST = "PeriodicFirst"
    DIRICHLET_LAPLACIAN = "DirichletLaplacian"
    DIRICHLET_FIRST = "DirichletFirst"
    MAXWELL1D_G = "Maxwell1dG"


def _circulant(n, stencil):
    """Sparse circulant matrix from ``{offset: value}``."""
    rows, cols, vals = [], [], []
    for off, v in stencil.items():
        i = np.arange(n)
        rows.append(i)
        cols.append((i + off) % n)
        vals.append(np.full(n, float(v)))
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return m.tocsr()


def fd_stencil(kind, N):
    """Integer stencil matrix and the power of ``dx`` it is divided by.

    Periodic kinds act on ``N`` grid values. Dirichlet kinds act on the
    ``N - 1`` interior values of an ``N``-interval grid. ``Maxwell1dG`` maps
    the ``N + 1`` nodal B values to the ``N - 1`` interior E values and is
    divided by ``2 dx``.
    """
    kind = FdKind(kind)
    if N < 3:
        raise ValueError(f"N={N} too small for the {kind.value} stencil (need N >= 3)")
    if kind is FdKind.PERIODIC_LAPLACIAN:
        return _circulant(N, {-1: 1, 0: -2, 1: 1}), 2, 1.0
    if kind is FdKind.PERIODIC_FIRST:
        return _circulant(N, {-1: -1, 1: 1}), 1, 0.5
    n = N - 1
    if kind is FdKind.DIRICHLET_LAPLACIAN:
        return sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="csr"), 2, 1.0
    if kind is FdKind.DIRICHLET_FIRST:
        return sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], format="csr"), 1, 0.5
    # Maxwell1dG: row i (E_{i+1}) couples B_i and B_{i+2}; endpoints doubled
    g = sp.lil_matrix((N - 1, N + 1))
    for i in range(N - 1):
        g[i, i] = -1.0
        g[i, i + 2] = 1.0
    g[0, 0] = -2.0
    g[N - 2, N] = 2.0
    return g.tocsr(), 1, 0.5


def fd_operator(kind, N, dx):
    """Finite-difference operator as a :class:`StructureOperator`.

    The scale carries ``1/dx`` (first derivatives, with the extra 1/2 of the
    central stencil) or ``1/dx^2`` (Laplacians). First-derivative kinds are
    declared skew, Laplacians negative semidefinite, ``Maxwell1dG`` has no
    class since it is rectangular.
    """
    kind = FdKind(kind)
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    stencil, power, factor = fd_stencil(kind, N)
    if kind in (FdKind.PERIODIC_LAPLACIAN, FdKind.DIRICHLET_LAPLACIAN):
        cls = StructureClass.NEGATIVE_SEMIDEFINITE
    elif kind is FdKind.MAXWELL1D_G:
        cls = None
    else:
        cls = StructureClass.SKEW
    return StructureOperator(stencil, cls, factor / dx**power, name=kind.value)


def fourier_wavenumbers(N):
    """Integer wavenumbers in DFT order with the Nyquist mode zeroed for even N."""
    k = np.fft.fftfreq(N, d=1.0 / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    return k


@dataclass(frozen=True, eq=False)
class SpectralDerivative:
    """Fourier differentiation ``F^-1 D F`` on ``N`` periodic samples over length ``l``."""

    N: int
    l: float
    wavenumbers: np.ndarray  # (2 pi i / l) k, complex

    def apply(self, v):
        """Transform-based application, O(N log N); real in, real out."""
        return self.apply_complex(np.asarray(v, dtype=float)).real

    def apply_complex(self, v):
        v = np.asarray(v)
        k = self.wavenumbers.reshape((-1,) + (1,) * (v.ndim - 1))
        return np.fft.ifft(k * np.fft.fft(v, axis=0), axis=0)

    @property
    def matrix(self):
        """Dense real N x N matrix of the operator."""
        return self.apply(np.eye(self.N))


def spectral_derivative_operator(N, l):
    if N < 2 or not l > 0:
        raise ValueError(f"need N >= 2 and l > 0, got N={N}, l={l}")
    k = fourier_wavenumbers(N)
    return SpectralDerivative(int(N), float(l), (2j * np.pi / l) * k)


@dataclass(frozen=True, eq=False)
class GllBasis:
    p: int
    nodes: np.ndarray
    weights: np.ndarray
    diff: np.ndarray  # diff[j, k] = l_k'(x_j)


def _legendre_table(x, p):
    P = np.zeros((len(x), p + 1))
    P[:, 0] = 1.0
    if p >= 1:
        P[:, 1] = x
    for k in range(2, p + 1):
        P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
    return P


def gll_basis(p, tol=1e-14, max_iter=100):
    """Nodes, weights and differentiation matrix on ``p + 1`` GLL points.

    Nodes are the roots of ``(1 - x^2) P_p'(x)``, found by Newton's method
    from Chebyshev-Gauss-Lobatto guesses.
    """
    if p < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {p}")
    x = -np.cos(np.pi * np.arange(p + 1) / p)
    for _ in range(max_iter):
        P = _legendre_table(x, p)
        # Newton step for (1-x^2) P_p'(x) written via the Legendre recurrence
        dx = (x * P[:, p] - P[:, p - 1]) / ((p + 1) * P[:, p])
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    else:
        raise RuntimeError(f"GLL node iteration did not converge for p={p}")
    x[0], x[-1] = -1.0, 1.0
    Pp = _legendre_table(x, p)[:, p]
    w = 2.0 / (p * (p + 1) * Pp**2)

    diff = np.zeros((p + 1, p + 1))
    for j in range(p + 1):
        for k in range(p + 1):
            if j != k:
                diff[j, k] = Pp[j] / (Pp[k] * (x[j] - x[k]))
    # diagonal from the row sums: derivative of a constant is zero
    diff[np.diag_indices(p + 1)] = -diff.sum(axis=1)
    return GllBasis(int(p), x, w, diff)


@dataclass(frozen=True, eq=False)
class Curl3d:
    """Periodic central-difference curl on an ``N^3`` grid.

    Component blocks are ordered (x, y, z); each component is stored in
    lexicographic C order over ``(i_x, i_y, i_z)``.
    """

    N: int
    dx: float
    stencil: sp.csr_matrix  # integer entries

    @property
    def scale(self):
        return 1.0 / (2.0 * self.dx)

    @property
    def A(self):
        return (self.scale * self.stencil).tocsr()

    def gradient_stencil(self):
        """Integer central-difference gradient ``(Dx, Dy, Dz)`` stacked, 3N^3 x N^3."""
        dx_, dy_, dz_ = _axis_differences(self.N)
        return sp.vstack([dx_, dy_, dz_]).tocsr()


def _axis_differences(N):
    d = _circulant(N, {-1: -1, 1: 1})
    eye = sp.identity(N, format="csr")
    dx_ = sp.kron(sp.kron(d, eye), eye, format="csr")
    dy_ = sp.kron(sp.kron(eye, d), eye, format="csr")
    dz_ = sp.kron(sp.kron(eye, eye), d, format="csr")
    return dx_, dy_, dz_


def curl_matrix_3d(N, dx):
    if N < 3:
        raise ValueError(f"N={N} too small for the periodic curl (need N >= 3)")
    dx_, dy_, dz_ = _axis_differences(N)
    stencil = sp.bmat([[None, -dz_, dy_], [dz_, None, -dx_], [-dy_, dx_, None]], format="csr")
    return Curl3d(int(N), float(dx), stencil)
