"""The example problems as semi-discrete systems with their initial data.

Every builder returns a :class:`~avflab.system.SemiDiscreteSystem` whose
driving energy and structure matrix reproduce the displayed semi-discrete
equations; auxiliary monitors carry the second energy of bi-Hamiltonian
problems (with its structure matrix in ``aux_operators``) or the discrete
probability for the nonlinear Schroedinger equation.
"""
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .operators import FdKind, curl_matrix_3d, fd_stencil, gll_basis, spectral_derivative_operator
from .system import (
    EnergyMonitor,
    SemiDiscreteSystem,
    StateLayout,
    StructureClass,
    StructureOperator,
)
from .terms import CosineTerm, ElementwisePolynomialTerm, ModulusQuarticTerm, QuadraticTerm

SKEW = StructureClass.SKEW
NSD = StructureClass.NEGATIVE_SEMIDEFINITE


@dataclass(frozen=True)
class ProblemInfo:
    name: str
    params: dict  # published values, also the defaults
    N: int  # default resolution (p for Wave2dGll)
    paper_N: int
    domain: tuple
    dt: float  # published step size
    steps: int  # default horizon in steps
    conservative: bool
    summary: str


PROBLEMS = {
    p.name: p
    for p in [
        ProblemInfo("SineGordonFd", {"alpha": 1.0}, 200, 200, (-20.0, 20.0), 0.01, 1000, True,
                    "sine-Gordon, periodic finite differences"),
        ProblemInfo("SineGordonSpectral", {"alpha": 1.0}, 200, 200, (-20.0, 20.0), 0.01, 1000, True,
                    "sine-Gordon, Fourier pseudospectral"),
        ProblemInfo("Kdv", {}, 400, 400, (-20.0, 20.0), 0.001, 1000, True,
                    "Korteweg-de Vries, periodic finite differences"),
        ProblemInfo("Nls", {"gamma": 1.0}, 200, 200, (-20.0, 20.0), 0.05, 200, True,
                    "cubic nonlinear Schroedinger, periodic"),
        ProblemInfo("Wave2dGll", {}, 5, 5, (-1.0, 1.0), 0.625, 16, True,
                    "2D wave with quartic potential, one GLL spectral element"),
        ProblemInfo("LinearSchrodinger", {}, 50, 50, (-np.pi, np.pi), 0.1, 500, True,
                    "linear Schroedinger with V = 1 - cos x, bi-Hamiltonian"),
        ProblemInfo("Maxwell1d", {"c": 1.0}, 100, 100, (0.0, 1.0), 0.001, 1000, True,
                    "1D Maxwell, central differences, trapezoidal energy"),
        ProblemInfo("Maxwell3d", {"c": 1.0}, 10, 30, (0.0, 1.0), 0.01, 100, True,
                    "3D Maxwell on the periodic unit cube, helicity + quadratic energies"),
        ProblemInfo("AllenCahn", {"d": 0.001}, 100, 100, (0.0, 1.0), 0.001, 1000, False,
                    "Allen-Cahn, Neumann"),
        ProblemInfo("CahnHilliard", {"p": -1.0, "q": -0.001, "r": 1.0}, 50, 50, (0.0, 1.0), 1.0 / 1200, 1200, False,
                    "Cahn-Hilliard, periodic"),
        ProblemInfo("GinzburgLandau", {"epsilon": 0.001}, 50, 50, (-5.0, 5.0), 0.001, 1000, False,
                    "Ginzburg-Landau traffic model, N = d/dx + eps d^2/dx^2"),
        ProblemInfo("Heat", {}, 50, 50, (0.0, 1.0), 0.0025, 200, False,
                    "heat equation, Dirichlet, two Lyapunov functions"),
    ]
}


def _snake(name):
    out = []
    for i, ch in enumerate(name):
        if ch.isupper() and i:
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


_ALIASES = {}
for _n in PROBLEMS:
    _ALIASES[_n.lower()] = _n
    _ALIASES[_snake(_n)] = _n
_ALIASES.update({"kdv": "Kdv", "nls": "Nls", "wave2d_gll": "Wave2dGll", "wave2d": "Wave2dGll",
                 "maxwell1d": "Maxwell1d", "maxwell3d": "Maxwell3d"})


def canonical_name(name):
    key = str(name).strip()
    if key in PROBLEMS:
        return key
    try:
        return _ALIASES[key.lower()]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; known: {', '.join(PROBLEMS)}") from None


@dataclass(frozen=True)
class ProblemSpec:
    """Problem identity, parameters, resolution (``p`` for Wave2dGll) and domain."""

    name: str
    params: dict = field(default_factory=dict)
    N: int | None = None
    domain: tuple | None = None
    seed: int = 0

    def resolved(self):
        info = PROBLEMS[canonical_name(self.name)]
        missing = sorted(set(info.params) - set(self.params))
        if missing:
            raise ValueError(f"{info.name}: missing parameter(s) {', '.join(missing)}")
        unknown = sorted(set(self.params) - set(info.params))
        if unknown:
            raise ValueError(f"{info.name}: unknown parameter(s) {', '.join(unknown)}")
        N = info.N if self.N is None else int(self.N)
        domain = info.domain if self.domain is None else tuple(float(v) for v in self.domain)
        if len(domain) != 2 or not domain[1] > domain[0]:
            raise ValueError(f"{info.name}: bad domain {domain}")
        return replace(self, name=info.name, N=N, domain=domain, params={k: float(v) for k, v in self.params.items()})


def default_spec(name, paper_scale=False, **overrides):
    """Spec with the published parameters; ``paper_scale`` lifts desk-size defaults."""
    info = PROBLEMS[canonical_name(name)]
    params = dict(info.params)
    params.update(overrides.pop("params", {}))
    N = overrides.pop("N", info.paper_N if paper_scale else info.N)
    return ProblemSpec(info.name, params, N, **overrides)


# --- builders ---------------------------------------------------------------


def _grid(a, b, N):
    dx = (b - a) / N
    return dx, a + dx * np.arange(N + 1)


def _canonical_pair(n, scale=1.0, sign=1):
    """``sign * [[0, I], [-I, 0]]`` on two stacked fields of length ``n``."""
    eye = sp.identity(n, format="csr")
    m = sp.bmat([[None, sign * eye], [-sign * eye, None]], format="csr")
    return StructureOperator(m, SKEW, scale)


def _require_N(name, N, minimum):
    if N < minimum:
        raise ValueError(f"{name}: unsupported resolution N={N} (need >= {minimum})")


def _sine_gordon(spec, spectral):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    if spectral:
        dmat = spectral_derivative_operator(N, b - a).matrix
        k_phi = dmat.T @ dmat
        Q = np.zeros((2 * N, 2 * N))
        Q[:N, :N] = k_phi
        Q[N:, N:] = np.eye(N)
    else:
        lap, _, _ = fd_stencil(FdKind.PERIODIC_LAPLACIAN, N)
        Q = sp.block_diag([-lap / dx**2, sp.identity(N)], format="csr")
    terms = (QuadraticTerm(Q), CosineTerm(2 * N, spec.params["alpha"], index=slice(0, N)))
    driver = EnergyMonitor("H", terms, 2 * N, dx)
    layout = StateLayout("StackedPair", ("phi", "pi"), ((N,), (N,)), (dx,), (a,), "periodic")
    return SemiDiscreteSystem(spec.name, _canonical_pair(N), driver, layout,
                              params=spec.params, grid={"x": x[:N]})


def _kdv(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    lap, _, _ = fd_stencil(FdKind.PERIODIC_LAPLACIAN, N)
    first, _, half = fd_stencil(FdKind.PERIODIC_FIRST, N)
    terms = (QuadraticTerm(-lap / dx**2), ElementwisePolynomialTerm(N, [0.0, 0.0, 0.0, -1.0]))
    driver = EnergyMonitor("H", terms, N, dx)
    layout = StateLayout("ScalarField1D", ("u",), ((N,),), (dx,), (a,), "periodic")
    op = StructureOperator(first, SKEW, half / dx)
    return SemiDiscreteSystem(spec.name, op, driver, layout, params=spec.params, grid={"x": x[:N]})


def _complex_pair_operator(n):
    # u' = i dH/du* becomes (a, b)' = 1/2 [[0, -I], [I, 0]] grad H in real coordinates
    return _canonical_pair(n, scale=0.5, sign=-1)


def _probability(n, dx, name):
    return EnergyMonitor(name, (QuadraticTerm(2.0 * sp.identity(2 * n, format="csr")),), 2 * n, dx)


def _nls(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    lap, _, _ = fd_stencil(FdKind.PERIODIC_LAPLACIAN, N)
    k = 2.0 * lap / dx**2
    terms = (QuadraticTerm(sp.block_diag([k, k], format="csr")), ModulusQuarticTerm(N, spec.params["gamma"]))
    driver = EnergyMonitor("H", terms, 2 * N, dx)
    layout = StateLayout("StackedPair", ("re", "im"), ((N,), (N,)), (dx,), (a,), "periodic")
    return SemiDiscreteSystem(spec.name, _complex_pair_operator(N), driver, layout,
                              aux_monitors=(_probability(N, dx, "probability"),),
                              params=spec.params, grid={"x": x[:N]})


def _linear_schrodinger(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    x = x[:N]
    V = 1.0 - np.cos(x)
    lap, _, _ = fd_stencil(FdKind.PERIODIC_LAPLACIAN, N)
    A = (lap / dx**2 - sp.diags(V)).tocsr()
    h1 = EnergyMonitor("H1", (QuadraticTerm(sp.block_diag([2 * A, 2 * A], format="csr")),), 2 * N, dx)
    h2 = _probability(N, dx, "H2")
    s2 = StructureOperator(sp.bmat([[None, -A], [A, None]], format="csr"), SKEW, 0.5)
    layout = StateLayout("StackedPair", ("re", "im"), ((N,), (N,)), (dx,), (a,), "periodic")
    return SemiDiscreteSystem(spec.name, _complex_pair_operator(N), h1, layout,
                              aux_monitors=(h2,), aux_operators={"H2": s2},
                              params=spec.params, grid={"x": x, "V": V})


def _maxwell1d(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    c = spec.params["c"]
    wb = np.full(N + 1, c)
    wb[[0, -1]] = 0.5 * c
    Q = sp.diags(np.concatenate([np.full(N - 1, c), wb]), format="csr")
    driver = EnergyMonitor("H", (QuadraticTerm(Q),), 2 * N, dx)
    G, _, half = fd_stencil(FdKind.MAXWELL1D_G, N)
    S = sp.bmat([[None, G], [-G.T, None]], format="csr")
    layout = StateLayout("StackedPair", ("E", "B"), ((N - 1,), (N + 1,)), (dx,), (a,), "E dirichlet, B neumann")
    return SemiDiscreteSystem(spec.name, StructureOperator(S, SKEW, half / dx), driver, layout,
                              params=spec.params, grid={"x": x})


def _maxwell3d(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx = (b - a) / N
    c = spec.params["c"]
    curl = curl_matrix_3d(N, dx)
    n = 3 * N**3
    C = curl.stencil
    h2 = EnergyMonitor("H2", (QuadraticTerm(c * sp.identity(2 * n, format="csr")),), 2 * n, dx**3)
    A = curl.A
    h1 = EnergyMonitor("H1", (QuadraticTerm(sp.block_diag([c * A, c * A], format="csr")),), 2 * n, dx**3)
    s2 = StructureOperator(sp.bmat([[None, -C], [C, None]], format="csr"), SKEW, curl.scale)
    s1 = _canonical_pair(n, sign=-1)
    layout = StateLayout("Field3D", ("B", "E"), ((3, N, N, N), (3, N, N, N)), (dx, dx, dx), (a, a, a), "periodic")
    return SemiDiscreteSystem(spec.name, s2, h2, layout, aux_monitors=(h1,), aux_operators={"H1": s1},
                              params=spec.params, grid={"N": N})


def _wave2d(spec):
    p = spec.N
    if p < 1:
        raise ValueError(f"{spec.name}: unsupported degree p={p}")
    if spec.domain != (-1.0, 1.0):
        raise ValueError(f"{spec.name}: only the reference square [-1, 1]^2 is supported")
    basis = gll_basis(p)
    n = p + 1
    D = sp.csr_matrix(basis.diff)
    eye = sp.identity(n, format="csr")
    W = np.outer(basis.weights, basis.weights).ravel()
    Wd = sp.diags(W)
    kx = sp.kron(D, eye, format="csr")  # differentiates along the first index
    ky = sp.kron(eye, D, format="csr")
    K = (kx.T @ Wd @ kx + ky.T @ Wd @ ky).tocsr()
    m = n * n
    terms = (
        QuadraticTerm(sp.block_diag([K, Wd], format="csr")),
        ElementwisePolynomialTerm(2 * m, [0.0, 0.0, 0.0, 0.0, 0.25], index=slice(0, m), weights=W),
    )
    driver = EnergyMonitor("H", terms, 2 * m, 1.0)
    layout = StateLayout("TensorPair2D", ("phi", "pi"), ((n, n), (n, n)), (1.0, 1.0), (-1.0, -1.0), "periodic")
    return SemiDiscreteSystem(spec.name, _canonical_pair(m), driver, layout, params=spec.params,
                              grid={"nodes": basis.nodes, "weights": basis.weights, "diff": basis.diff})


def _allen_cahn(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    fwd = sp.diags([-np.ones(N), np.ones(N)], [0, 1], shape=(N, N + 1), format="csr")
    Q = (spec.params["d"] / dx**2) * (fwd.T @ fwd) - sp.identity(N + 1)
    terms = (QuadraticTerm(Q.tocsr()), ElementwisePolynomialTerm(N + 1, [0.0, 0.0, 0.0, 0.0, 0.25]))
    driver = EnergyMonitor("H", terms, N + 1, dx)
    op = StructureOperator(-sp.identity(N + 1, format="csr"), NSD)
    layout = StateLayout("ScalarField1D", ("u",), ((N + 1,),), (dx,), (a,), "neumann")
    return SemiDiscreteSystem(spec.name, op, driver, layout, params=spec.params, grid={"x": x})


def _cahn_hilliard(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    prm = spec.params
    lap, _, _ = fd_stencil(FdKind.PERIODIC_LAPLACIAN, N)
    Q = (prm["p"] * sp.identity(N) + (prm["q"] / dx**2) * lap).tocsr()
    terms = (QuadraticTerm(Q), ElementwisePolynomialTerm(N, [0.0, 0.0, 0.0, 0.0, 0.25 * prm["r"]]))
    driver = EnergyMonitor("H", terms, N, dx)
    op = StructureOperator(lap, NSD, 1.0 / dx**2)
    layout = StateLayout("ScalarField1D", ("u",), ((N,),), (dx,), (a,), "periodic")
    return SemiDiscreteSystem(spec.name, op, driver, layout, params=spec.params, grid={"x": x[:N]})


def _ginzburg_landau(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    n = N - 1
    # differences u_{j+1} - u_j for j = 1..N-1 with u_N = 0
    fwd = sp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], shape=(n, n), format="csr")
    Q = (6.0 * sp.identity(n) - (fwd.T @ fwd) / dx**2).tocsr()
    terms = (QuadraticTerm(Q), ElementwisePolynomialTerm(n, [0.0, 0.0, 0.0, 0.0, -0.25]))
    driver = EnergyMonitor("H", terms, n, dx)
    first, _, half = fd_stencil(FdKind.DIRICHLET_FIRST, N)
    lap, _, _ = fd_stencil(FdKind.DIRICHLET_LAPLACIAN, N)
    M = (half / dx) * first + (spec.params["epsilon"] / dx**2) * lap
    layout = StateLayout("ScalarField1D", ("u",), ((n,),), (dx,), (a + dx,), "dirichlet")
    return SemiDiscreteSystem(spec.name, StructureOperator(M.tocsr(), NSD), driver, layout,
                              params=spec.params, grid={"x": x[1:N]})


def _heat(spec):
    a, b = spec.domain
    N = spec.N
    _require_N(spec.name, N, 3)
    dx, x = _grid(a, b, N)
    n = N - 1
    lap, _, _ = fd_stencil(FdKind.DIRICHLET_LAPLACIAN, N)
    h2 = EnergyMonitor("H2", (QuadraticTerm(sp.identity(n, format="csr")),), n, dx)
    h1 = EnergyMonitor("H1", (QuadraticTerm((-lap / dx**2).tocsr()),), n, dx)
    n2 = StructureOperator(lap, NSD, 1.0 / dx**2)
    n1 = StructureOperator(-sp.identity(n, format="csr"), NSD)
    layout = StateLayout("ScalarField1D", ("u",), ((n,),), (dx,), (a + dx,), "dirichlet")
    return SemiDiscreteSystem(spec.name, n2, h2, layout, aux_monitors=(h1,), aux_operators={"H1": n1},
                              params=spec.params, grid={"x": x[1:N]})


_BUILDERS = {
    "SineGordonFd": lambda s: _sine_gordon(s, spectral=False),
    "SineGordonSpectral": lambda s: _sine_gordon(s, spectral=True),
    "Kdv": _kdv,
    "Nls": _nls,
    "Wave2dGll": _wave2d,
    "LinearSchrodinger": _linear_schrodinger,
    "Maxwell1d": _maxwell1d,
    "Maxwell3d": _maxwell3d,
    "AllenCahn": _allen_cahn,
    "CahnHilliard": _cahn_hilliard,
    "GinzburgLandau": _ginzburg_landau,
    "Heat": _heat,
}


def build_problem(spec):
    spec = spec.resolved()
    return _BUILDERS[spec.name](spec)


def initial_condition(spec, system=None):
    """Initial state from the example's data, in the system's layout."""
    spec = spec.resolved()
    system = build_problem(spec) if system is None else system
    name = spec.name
    g = system.grid
    if name in ("SineGordonFd", "SineGordonSpectral"):
        x = g["x"]
        return np.concatenate([np.zeros_like(x), 8.0 / np.cosh(2.0 * x)])
    if name == "Kdv":
        return 6.0 / np.cosh(g["x"]) ** 2
    if name == "Nls":
        x = g["x"]
        return np.concatenate([np.exp(-((x - 1.0) ** 2) / 2.0), np.exp(-(x**2) / 2.0)])
    if name == "LinearSchrodinger":
        x = g["x"]
        return np.concatenate([np.exp(-((x / 2.0) ** 2)), np.zeros_like(x)])
    if name == "Maxwell1d":
        x = g["x"]
        bump = np.exp(-100.0 * (x - 0.5) ** 2)
        return np.concatenate([bump[1:-1], bump])
    if name == "Maxwell3d":
        rng = np.random.default_rng(spec.seed)
        return rng.random(system.dim)
    if name == "Wave2dGll":
        nodes = g["nodes"]
        s = 1.0 / np.cosh(10.0 * nodes)
        return np.concatenate([np.outer(s, s).ravel(), np.zeros(len(nodes) ** 2)])
    if name == "AllenCahn":
        return np.cos(np.pi * g["x"])
    if name == "CahnHilliard":
        x = g["x"]
        return (0.1 * np.sin(2 * np.pi * x) + 0.01 * np.cos(4 * np.pi * x)
                + 0.06 * np.sin(4 * np.pi * x) + 0.02 * np.cos(10 * np.pi * x))
    if name == "GinzburgLandau":
        return np.exp(-100.0 * (g["x"] - 0.5) ** 2)
    if name == "Heat":
        x = g["x"]
        return x * (1.0 - x)
    raise ValueError(name)  # pragma: no cover


def embed_boundary(system, u):
    """Full nodal field with the Dirichlet boundary zeros restored (1D problems)."""
    if system.name in ("Heat", "GinzburgLandau"):
        return np.concatenate([[0.0], u, [0.0]])
    return np.asarray(u)
