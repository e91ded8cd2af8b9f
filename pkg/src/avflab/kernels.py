"""Elementwise kernels behind the averaged nonlinearities.

Each kernel has a pure-numpy implementation and a numba ``@njit`` twin with
identical arithmetic. The numba path is used when numba imports cleanly and
the environment variable ``AVFLAB_DISABLE_NUMBA`` is unset (or ``0``).

The module-level functions dispatch to whichever backend is active;
``numpy_impl`` and ``numba_impl`` expose both paths explicitly so tests and
the benchmark can compare them.
"""
import os
from types import SimpleNamespace

import numpy as np

#: |b - a| at or below which the cosine difference quotient uses its limit form.
TRIG_SERIES_THRESHOLD = 1e-8
#: |h| below which sinc'(h) is evaluated by its Taylor series.
SINC_DERIV_SERIES = 1e-3


def _env_disabled():
    flag = os.environ.get("AVFLAB_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no")


# --- numpy path -------------------------------------------------------------


def _np_sinc(h):
    h = np.asarray(h, dtype=float)
    out = np.ones_like(h)
    big = np.abs(h) > 0.5 * TRIG_SERIES_THRESHOLD
    out[big] = np.sin(h[big]) / h[big]
    small = ~big
    out[small] = 1.0 - h[small] ** 2 / 6.0
    return out


def _np_sinc_deriv(h):
    h = np.asarray(h, dtype=float)
    out = np.empty_like(h)
    big = np.abs(h) >= SINC_DERIV_SERIES
    hb = h[big]
    out[big] = (hb * np.cos(hb) - np.sin(hb)) / hb**2
    hs = h[~big]
    h2 = hs * hs
    out[~big] = hs * (-1.0 / 3.0 + h2 * (1.0 / 30.0 - h2 / 840.0))
    return out


def _np_trig_dq(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return -np.sin(0.5 * (a + b)) * _np_sinc(0.5 * (b - a))


def _np_trig_dq_db(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = 0.5 * (a + b)
    h = 0.5 * (b - a)
    return -0.5 * np.cos(m) * _np_sinc(h) - 0.5 * np.sin(m) * _np_sinc_deriv(h)


def _np_horner(coeffs, x):
    acc = np.zeros_like(x)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


def _np_poly_average(a, b, dcoeffs, d2coeffs, nodes, weights):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    avg = np.zeros_like(a)
    avg_h = np.zeros_like(a)
    for xi, w in zip(nodes, weights):
        x = (1.0 - xi) * a + xi * b
        avg += w * _np_horner(dcoeffs, x)
        avg_h += (w * xi) * _np_horner(d2coeffs, x)
    return avg, avg_h


numpy_impl = SimpleNamespace(
    trig_dq=_np_trig_dq,
    trig_dq_db=_np_trig_dq_db,
    poly_average=_np_poly_average,
)


# --- numba path -------------------------------------------------------------

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is an optional extra
    _numba = None


def _build_numba():
    njit = _numba.njit
    thresh = TRIG_SERIES_THRESHOLD
    dthresh = SINC_DERIV_SERIES

    @njit(cache=True)
    def sinc(h):
        if abs(h) > 0.5 * thresh:
            return np.sin(h) / h
        return 1.0 - h * h / 6.0

    @njit(cache=True)
    def sinc_deriv(h):
        if abs(h) >= dthresh:
            return (h * np.cos(h) - np.sin(h)) / (h * h)
        h2 = h * h
        return h * (-1.0 / 3.0 + h2 * (1.0 / 30.0 - h2 / 840.0))

    @njit(cache=True)
    def trig_dq(a, b):
        out = np.empty(a.shape[0])
        for i in range(a.shape[0]):
            out[i] = -np.sin(0.5 * (a[i] + b[i])) * sinc(0.5 * (b[i] - a[i]))
        return out

    @njit(cache=True)
    def trig_dq_db(a, b):
        out = np.empty(a.shape[0])
        for i in range(a.shape[0]):
            m = 0.5 * (a[i] + b[i])
            h = 0.5 * (b[i] - a[i])
            out[i] = -0.5 * np.cos(m) * sinc(h) - 0.5 * np.sin(m) * sinc_deriv(h)
        return out

    @njit(cache=True)
    def poly_average(a, b, dcoeffs, d2coeffs, nodes, weights):
        n = a.shape[0]
        avg = np.zeros(n)
        avg_h = np.zeros(n)
        for i in range(n):
            for k in range(nodes.shape[0]):
                xi = nodes[k]
                x = (1.0 - xi) * a[i] + xi * b[i]
                p = 0.0
                for c in range(dcoeffs.shape[0] - 1, -1, -1):
                    p = p * x + dcoeffs[c]
                q = 0.0
                for c in range(d2coeffs.shape[0] - 1, -1, -1):
                    q = q * x + d2coeffs[c]
                avg[i] += weights[k] * p
                avg_h[i] += weights[k] * xi * q
        return avg, avg_h

    def _flat(fn):
        def wrapper(a, b, *rest):
            a = np.ascontiguousarray(a, dtype=np.float64)
            b = np.ascontiguousarray(b, dtype=np.float64)
            shape = np.broadcast_shapes(a.shape, b.shape)
            a = np.broadcast_to(a, shape).ravel()
            b = np.broadcast_to(b, shape).ravel()
            rest = [np.ascontiguousarray(r, dtype=np.float64) for r in rest]
            out = fn(a, b, *rest)
            if isinstance(out, tuple):
                return tuple(o.reshape(shape) for o in out)
            return out.reshape(shape)

        wrapper.__wrapped__ = fn
        return wrapper

    return SimpleNamespace(
        trig_dq=_flat(trig_dq),
        trig_dq_db=_flat(trig_dq_db),
        poly_average=_flat(poly_average),
    )


numba_impl = _build_numba() if _numba is not None else None

USE_NUMBA = numba_impl is not None and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"
_active = numba_impl if USE_NUMBA else numpy_impl


def trig_dq(a, b):
    """Elementwise ``(cos b - cos a) / (b - a)`` without cancellation."""
    return _active.trig_dq(a, b)


def trig_dq_db(a, b):
    """Partial derivative of :func:`trig_dq` with respect to ``b``."""
    return _active.trig_dq_db(a, b)


def poly_average(a, b, dcoeffs, d2coeffs, nodes, weights):
    """Quadrature averages of a polynomial and its xi-weighted derivative.

    Returns ``(sum_k w_k p(x_k), sum_k w_k xi_k q(x_k))`` with
    ``x_k = (1 - xi_k) a + xi_k b``, ``p`` and ``q`` given by ascending
    coefficient arrays.
    """
    return _active.poly_average(a, b, dcoeffs, d2coeffs, nodes, weights)
