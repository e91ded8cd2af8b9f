import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import settings

from avflab import (
    EnergyMonitor,
    SemiDiscreteSystem,
    StateLayout,
    StructureClass,
    StructureOperator,
    default_spec,
)
from avflab.terms import ElementwisePolynomialTerm, PolynomialTerm, QuadraticTerm

# reproducible example streams; the suite must give the same verdict on every run
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

ALL_PROBLEMS = ["SineGordonFd", "SineGordonSpectral", "Kdv", "Nls", "Wave2dGll", "LinearSchrodinger",
                "Maxwell1d", "Maxwell3d", "AllenCahn", "CahnHilliard", "GinzburgLandau", "Heat"]
CONSERVATIVE = ALL_PROBLEMS[:8]
DISSIPATIVE = ALL_PROBLEMS[8:]


def small_spec(name):
    """Default spec, with the 3D problem shrunk so per-test costs stay low."""
    return default_spec(name, N=4) if name == "Maxwell3d" else default_spec(name)


def ode_system(matrix, energy_terms, cls=StructureClass.SKEW, name="ode"):
    matrix = np.asarray(matrix, dtype=float)
    k = matrix.shape[0]
    driver = EnergyMonitor("H", tuple(energy_terms), k)
    layout = StateLayout("ScalarField1D", ("u",), ((k,),), (1.0,), (0.0,))
    return SemiDiscreteSystem(name, StructureOperator(matrix, cls), driver, layout)


def harmonic_oscillator():
    return ode_system([[0.0, 1.0], [-1.0, 0.0]], [QuadraticTerm(np.eye(2))], name="oscillator")


def decay_system(rate=1.0, k=1):
    return ode_system(-rate * np.eye(k), [QuadraticTerm(np.eye(k))], StructureClass.NEGATIVE_SEMIDEFINITE,
                      "decay")


def ridge_quartic(w):
    """``H = 1/4 (w.u)^4 + 1/2 |u|^2``: a non-separable degree-4 energy."""
    w = np.asarray(w, dtype=float)
    k = len(w)
    quartic = PolynomialTerm(
        k,
        energy=lambda u: 0.25 * (w @ u) ** 4,
        gradient=lambda u: (w @ u) ** 3 * w,
        hessian=lambda u: 3.0 * (w @ u) ** 2 * np.outer(w, w),
        degree=3,
    )
    return [QuadraticTerm(np.eye(k)), quartic]


def random_structured_system(rng, k=6, cls=StructureClass.SKEW):
    """Random skew (or ``-C^T C``) matrix with a random degree-4 energy."""
    a = rng.standard_normal((k, k)) / np.sqrt(k)
    m = a - a.T if cls is StructureClass.SKEW else -(a.T @ a)
    coeffs = np.concatenate([[0.0], rng.standard_normal(3), [abs(rng.standard_normal())]])
    terms = ridge_quartic(rng.standard_normal(k) / np.sqrt(k)) + [ElementwisePolynomialTerm(k, coeffs)]
    return ode_system(m, terms, cls, "random")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def as_dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
