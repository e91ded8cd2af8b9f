"""Building blocks of a discrete energy.

A discrete energy is a sum of terms. Each term knows its value, Euclidean
gradient and Hessian, and how to average its gradient along the segment
``(1 - xi) u0 + xi u1`` for ``xi`` in ``[0, 1]``. The averaging is exact in
closed form for affine gradients (midpoint), polynomial gradients (Gauss
quadrature with enough points) and cosine energies (difference quotient).

Besides the averaged gradient, every term returns the xi-weighted averaged
Hessian ``int_0^1 xi * hess((1 - xi) u0 + xi u1) dxi``, which is the
derivative of the averaged gradient with respect to ``u1`` and feeds Newton.
"""
import math

import numpy as np
import scipy.sparse as sp

from . import kernels

AFFINE = "affine"
POLYNOMIAL = "polynomial"
TRIGONOMETRIC = "trigonometric"
GENERIC = "generic"


def gauss_points(m):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _index_array(index, dim):
    if index is None:
        return np.arange(dim)
    if isinstance(index, slice):
        return np.arange(dim)[index]
    return np.asarray(index, dtype=np.intp)


def _scatter_diag(dim, idx, values):
    diag = np.zeros(dim)
    diag[idx] = values
    return sp.diags(diag, format="csr")


class Term:
    """Base term; subclasses override what they can do in closed form."""

    kind = GENERIC
    degree = None

    def __init__(self, dim):
        self.dim = int(dim)

    def energy(self, u):
        raise NotImplementedError

    def gradient(self, u):
        raise NotImplementedError

    def hessian(self, u):
        raise NotImplementedError

    def averaged_gradient(self, u0, u1, points):
        nodes, weights = gauss_points(points)
        out = np.zeros(self.dim)
        for xi, w in zip(nodes, weights):
            out += w * self.gradient((1.0 - xi) * u0 + xi * u1)
        return out

    def averaged_hessian(self, u0, u1, points):
        nodes, weights = gauss_points(points)
        acc = None
        for xi, w in zip(nodes, weights):
            h = (w * xi) * self.hessian((1.0 - xi) * u0 + xi * u1)
            acc = h if acc is None else acc + h
        return acc

    def describe(self):
        if self.degree is None:
            return self.kind
        return f"{self.kind}({self.degree})"


class QuadraticTerm(Term):
    """``1/2 u^T Q u + b^T u`` with symmetric ``Q`` (dense or sparse)."""

    kind = AFFINE
    degree = 1

    def __init__(self, Q, b=None):
        super().__init__(Q.shape[0])
        self.Q = Q.tocsr() if sp.issparse(Q) else np.asarray(Q, dtype=float)
        self.b = None if b is None else np.asarray(b, dtype=float)

    def gradient(self, u):
        g = self.Q @ u
        if self.b is not None:
            g = g + self.b
        return np.asarray(g, dtype=float)

    def energy(self, u):
        # exactly rounded sums keep energy differences free of accumulation noise
        e = 0.5 * math.fsum(u * (self.Q @ u))
        if self.b is not None:
            e += math.fsum(self.b * u)
        return e

    def hessian(self, u):
        return self.Q

    def averaged_gradient(self, u0, u1, points=None):
        return self.gradient(0.5 * (u0 + u1))

    def averaged_hessian(self, u0, u1, points=None):
        return 0.5 * self.Q


class ElementwisePolynomialTerm(Term):
    """``sum_j w_j P(u[idx_j])`` for a polynomial ``P`` (ascending coefficients)."""

    kind = POLYNOMIAL

    def __init__(self, dim, coeffs, index=None, weights=1.0):
        super().__init__(dim)
        self.idx = _index_array(index, dim)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.weights = np.broadcast_to(np.asarray(weights, dtype=float), self.idx.shape).copy()
        self.dcoeffs = np.polynomial.polynomial.polyder(self.coeffs)
        self.d2coeffs = np.polynomial.polynomial.polyder(self.dcoeffs)
        if self.d2coeffs.size == 0:
            self.d2coeffs = np.zeros(1)
        self.degree = max(len(self.coeffs) - 2, 0)

    def energy(self, u):
        return math.fsum(self.weights * np.polynomial.polynomial.polyval(u[self.idx], self.coeffs))

    def gradient(self, u):
        g = np.zeros(self.dim)
        g[self.idx] = self.weights * np.polynomial.polynomial.polyval(u[self.idx], self.dcoeffs)
        return g

    def hessian(self, u):
        vals = self.weights * np.polynomial.polynomial.polyval(u[self.idx], self.d2coeffs)
        return _scatter_diag(self.dim, self.idx, vals)

    def _averages(self, u0, u1, points):
        nodes, weights = gauss_points(points)
        return kernels.poly_average(
            u0[self.idx], u1[self.idx], self.dcoeffs, self.d2coeffs, nodes, weights
        )

    def averaged_gradient(self, u0, u1, points):
        avg, _ = self._averages(u0, u1, points)
        g = np.zeros(self.dim)
        g[self.idx] = self.weights * avg
        return g

    def averaged_hessian(self, u0, u1, points):
        _, avg_h = self._averages(u0, u1, points)
        return _scatter_diag(self.dim, self.idx, self.weights * avg_h)


class CosineTerm(Term):
    """``alpha * sum_j w_j (1 - cos u[idx_j])``."""

    kind = TRIGONOMETRIC

    def __init__(self, dim, alpha, index=None, weights=1.0):
        super().__init__(dim)
        self.alpha = float(alpha)
        self.idx = _index_array(index, dim)
        self.weights = np.broadcast_to(np.asarray(weights, dtype=float), self.idx.shape).copy()

    def energy(self, u):
        # 1 - cos x = 2 sin^2(x/2), free of cancellation near 0
        return self.alpha * math.fsum(self.weights * (2.0 * np.sin(0.5 * u[self.idx]) ** 2))

    def gradient(self, u):
        g = np.zeros(self.dim)
        g[self.idx] = self.alpha * self.weights * np.sin(u[self.idx])
        return g

    def hessian(self, u):
        return _scatter_diag(self.dim, self.idx, self.alpha * self.weights * np.cos(u[self.idx]))

    def averaged_gradient(self, u0, u1, points=None):
        # int_0^1 sin((1-xi) a + xi b) dxi = -(cos b - cos a) / (b - a)
        g = np.zeros(self.dim)
        g[self.idx] = -self.alpha * self.weights * kernels.trig_dq(u0[self.idx], u1[self.idx])
        return g

    def averaged_hessian(self, u0, u1, points=None):
        vals = -self.alpha * self.weights * kernels.trig_dq_db(u0[self.idx], u1[self.idx])
        return _scatter_diag(self.dim, self.idx, vals)


class PolynomialTerm(Term):
    """Polynomial energy given by callables; ``degree`` is the gradient's degree."""

    kind = POLYNOMIAL

    def __init__(self, dim, energy, gradient, hessian, degree):
        super().__init__(dim)
        self._energy = energy
        self._gradient = gradient
        self._hessian = hessian
        self.degree = int(degree)

    def energy(self, u):
        return float(self._energy(u))

    def gradient(self, u):
        return np.asarray(self._gradient(u), dtype=float)

    def hessian(self, u):
        return self._hessian(u)


class GenericTerm(PolynomialTerm):
    """Arbitrary smooth energy; averaged by Gauss quadrature of chosen order."""

    kind = GENERIC

    def __init__(self, dim, energy, gradient, hessian):
        super().__init__(dim, energy, gradient, hessian, degree=0)
        self.degree = None


class ModulusQuarticTerm(Term):
    """``gamma/2 * sum_j (a_j^2 + b_j^2)^2`` on a stacked complex field ``(a, b)``."""

    kind = POLYNOMIAL
    degree = 3

    def __init__(self, n, gamma):
        super().__init__(2 * n)
        self.n = int(n)
        self.gamma = float(gamma)

    def _split(self, u):
        return u[: self.n], u[self.n :]

    def energy(self, u):
        a, b = self._split(u)
        return 0.5 * self.gamma * math.fsum((a * a + b * b) ** 2)

    def gradient(self, u):
        a, b = self._split(u)
        rho = a * a + b * b
        return 2.0 * self.gamma * np.concatenate([rho * a, rho * b])

    def hessian(self, u):
        a, b = self._split(u)
        g = 2.0 * self.gamma
        haa = g * (3 * a * a + b * b)
        hbb = g * (a * a + 3 * b * b)
        hab = g * 2 * a * b
        return sp.bmat(
            [[sp.diags(haa), sp.diags(hab)], [sp.diags(hab), sp.diags(hbb)]], format="csr"
        )
