import mpmath
import numpy as np
import pytest
import scipy.sparse as sp

from avflab import (
    ImplicitSolveConfig,
    NonConvergence,
    SingularJacobian,
    StructureClass,
    avf_step,
    averaged_field,
    build_problem,
    default_spec,
    implicit_solve,
    initial_condition,
    make_plan,
    midpoint_step,
    trig_difference_quotient,
)
from avflab.avf import (
    AFFINE_MIDPOINT,
    GENERIC_GAUSS,
    POLYNOMIAL_GAUSS,
    TRIG_DIFFERENCE_QUOTIENT,
    AveragedFieldPlan,
    averaged_gradient,
    averaged_hessian,
    quadrature_averaged_field,
)
from avflab.solve import Stepper
from avflab.avf import AvfScheme
from avflab.terms import ElementwisePolynomialTerm, GenericTerm, QuadraticTerm, gauss_points
from conftest import ALL_PROBLEMS, as_dense, harmonic_oscillator, ode_system, small_spec

TOL = 1e-12


class TestTrigDifferenceQuotient:
    def test_equal_arguments(self):
        assert trig_difference_quotient(np.pi / 2, np.pi / 2) == pytest.approx(-1.0, abs=1e-16)

    def test_zero_pi(self):
        assert trig_difference_quotient(0.0, np.pi) == pytest.approx(-2 / np.pi, rel=1e-15)

    def test_tiny_gap_against_extended_precision(self):
        a, b = 1.0, 1.0 + 1e-13
        mpmath.mp.dps = 50
        ma, mb = mpmath.mpf(a), mpmath.mpf(b)  # the exact doubles
        exact = float((mpmath.cos(mb) - mpmath.cos(ma)) / (mb - ma))
        got = trig_difference_quotient(a, b)
        assert abs(got - exact) <= 1e-12
        assert abs(got + np.sin(1.0)) <= 1e-12

    def test_naive_formula_is_worse(self):
        a, b = 1.0, 1.0 + 1e-13
        naive = (np.cos(b) - np.cos(a)) / (b - a)
        assert abs(naive + np.sin(1.0)) > 1e-5  # the cancellation this guards against

    def test_symmetric_and_vectorized(self):
        rng = np.random.default_rng(0)
        a, b = rng.uniform(-9, 9, (2, 100))
        np.testing.assert_allclose(trig_difference_quotient(a, b), trig_difference_quotient(b, a), rtol=1e-15)
        assert trig_difference_quotient(a, b).shape == (100,)

    @pytest.mark.parametrize("gap", [1e-3, 1e-6, 1e-8, 1.1e-8, 1e-10, 1e-15])
    def test_continuity_across_threshold(self, gap):
        mpmath.mp.dps = 60
        a = 0.7
        b = a + gap
        exact = float((mpmath.cos(mpmath.mpf(b)) - mpmath.cos(mpmath.mpf(a))) / (mpmath.mpf(b) - mpmath.mpf(a)))
        assert abs(trig_difference_quotient(a, b) - exact) <= 2e-16 * 4


class TestPlan:
    def test_strategies(self):
        system = build_problem(default_spec("SineGordonFd", N=10))
        plan = make_plan(system)
        assert [s.kind for s in plan.strategies] == [AFFINE_MIDPOINT, TRIG_DIFFERENCE_QUOTIENT]
        kdv = make_plan(build_problem(default_spec("Kdv", N=10)))
        assert kdv.strategies[1].kind == POLYNOMIAL_GAUSS
        assert 2 * kdv.strategies[1].points - 1 >= 2
        assert all(s.exact for s in kdv.strategies)

    def test_generic_records_order(self):
        t = GenericTerm(2, np.sum, np.ones_like, lambda u: np.zeros((2, 2)))
        from avflab import EnergyMonitor

        plan = AveragedFieldPlan.for_monitor(EnergyMonitor("H", (t,), 2), generic_points=5)
        assert plan.strategies[0].kind == GENERIC_GAUSS and plan.strategies[0].points == 5
        assert not plan.strategies[0].exact

    @pytest.mark.parametrize("degree", range(1, 10))
    def test_polynomial_points_are_sufficient(self, degree):
        coeffs = np.zeros(degree + 2)
        coeffs[-1] = 1.0
        t = ElementwisePolynomialTerm(1, coeffs)
        from avflab import EnergyMonitor

        s = AveragedFieldPlan.for_monitor(EnergyMonitor("H", (t,), 1)).strategies[0]
        assert 2 * s.points - 1 >= degree
        # the closed form equals the exact integral of (d+1) (2 xi)^d over [0, 1]
        got = t.averaged_gradient(np.zeros(1), np.full(1, 2.0), s.points)[0]
        assert got == pytest.approx(2.0**degree, rel=1e-14)


def test_affine_average_is_midpoint():
    rng = np.random.default_rng(1)
    Q = rng.standard_normal((4, 4))
    Q = Q + Q.T
    b = rng.standard_normal(4)
    system = ode_system(np.eye(4), [QuadraticTerm(Q, b)], StructureClass.NEGATIVE_SEMIDEFINITE)
    u0, u1 = rng.standard_normal((2, 4))
    np.testing.assert_allclose(averaged_field(system, make_plan(system), u0, u1), Q @ (u0 + u1) / 2 + b,
                               rtol=1e-14)


def test_cubic_average_and_simpson():
    t = ElementwisePolynomialTerm(1, [0, 0, 0, 0, 0.25])  # gradient u^3
    system = ode_system(np.eye(1), [t], StructureClass.NEGATIVE_SEMIDEFINITE)
    got = averaged_field(system, make_plan(system), np.zeros(1), np.full(1, 2.0))[0]
    assert got == pytest.approx(2.0, abs=1e-15)
    simpson = (0.0 + 4 * 1.0**3 + 2.0**3) / 6
    assert simpson == got


def test_sine_gordon_closed_form():
    N = 20
    system = build_problem(default_spec("SineGordonFd", N=N))
    rng = np.random.default_rng(2)
    u0, u1 = rng.uniform(-2, 2, (2, 2 * N))
    f = averaged_field(system, make_plan(system), u0, u1)
    dx = 40.0 / N
    L = (np.diag(-2 * np.ones(N)) + np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1))
    L[0, -1] = L[-1, 0] = 1
    p0, p1 = u0[:N], u1[:N]
    # average of -sin over the segment: (cos p1 - cos p0) / (p1 - p0)
    pi_rhs = L @ (p0 + p1) / 2 / dx**2 + (np.cos(p1) - np.cos(p0)) / (p1 - p0)
    np.testing.assert_allclose(f[N:], pi_rhs, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(f[:N], (u0[N:] + u1[N:]) / 2, rtol=1e-15)


@pytest.mark.parametrize("name", ALL_PROBLEMS)
def test_plan_matches_gauss_oracle(name):
    spec = small_spec(name)
    system = build_problem(spec)
    rng = np.random.default_rng(4)
    u0 = initial_condition(spec, system)
    for u1 in (u0 + 0.1 * rng.uniform(-1, 1, system.dim), rng.uniform(-1, 1, system.dim)):
        got = averaged_field(system, make_plan(system), u0, u1)
        ref = quadrature_averaged_field(system, u0, u1, 64)
        assert np.max(np.abs(got - ref)) <= 1e-11 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("name", ["SineGordonFd", "Kdv", "Nls", "Wave2dGll", "AllenCahn", "GinzburgLandau"])
def test_averaged_hessian_is_u1_derivative(name):
    system = build_problem(default_spec(name, N=3 if name == "Wave2dGll" else 8))
    plan = make_plan(system)
    rng = np.random.default_rng(5)
    u0, u1 = rng.uniform(-1, 1, (2, system.dim))
    H = as_dense(averaged_hessian(system.driver, plan, u0, u1))
    h = 1e-6
    fd = np.empty_like(H)
    for i in range(system.dim):
        e = np.zeros(system.dim)
        e[i] = h
        fd[:, i] = (averaged_gradient(system.driver, plan, u0, u1 + e)
                    - averaged_gradient(system.driver, plan, u0, u1 - e)) / (2 * h)
    assert np.max(np.abs(H - fd)) <= 1e-6 * max(1.0, np.max(np.abs(H)))


class TestAvfStep:
    def test_linear_equals_midpoint(self):
        system = build_problem(default_spec("LinearSchrodinger", N=20))
        u = initial_condition(default_spec("LinearSchrodinger", N=20), system)
        cfg = ImplicitSolveConfig(tol=TOL)
        a, _ = avf_step(system, u, 0.1, cfg)
        m, _ = midpoint_step(system, u, 0.1, cfg)
        assert np.max(np.abs(a - m)) <= 10 * TOL

    @pytest.mark.parametrize("dt", [0.01, 0.5, 3.0, 100.0])
    def test_harmonic_oscillator_conserves(self, dt):
        system = harmonic_oscillator()
        u = np.array([0.3, -1.2])
        v, _ = avf_step(system, u, dt, ImplicitSolveConfig(tol=TOL))
        assert system.driver.energy(v) == pytest.approx(system.driver.energy(u), abs=10 * TOL)

    def test_allen_cahn_one_step_dissipates(self):
        spec = default_spec("AllenCahn")
        system = build_problem(spec)
        u0 = initial_condition(spec, system)
        u1, stats = avf_step(system, u0, 0.001)
        assert system.driver.energy(u1) <= system.driver.energy(u0)
        assert stats.residual <= TOL

    def test_residual_within_tol(self):
        spec = default_spec("Kdv", N=100)
        system = build_problem(spec)
        u0 = initial_condition(spec, system)
        cfg = ImplicitSolveConfig(tol=1e-12)
        u1, stats = avf_step(system, u0, 0.001, cfg)
        r = u1 - u0 - 0.001 * averaged_field(system, make_plan(system), u0, u1)
        assert np.max(np.abs(r)) <= cfg.tol and stats.iterations >= 1

    def test_zero_dt_rejected(self):
        with pytest.raises(ValueError):
            avf_step(harmonic_oscillator(), np.ones(2), 0.0)

    def test_newton_and_fixed_point_agree(self):
        spec = default_spec("SineGordonFd", N=40)
        system = build_problem(spec)
        u0 = initial_condition(spec, system)
        a, sa = avf_step(system, u0, 0.01, ImplicitSolveConfig(method="newton"))
        b, sb = avf_step(system, u0, 0.01, ImplicitSolveConfig(method="fixed_point", max_iter=500))
        assert np.max(np.abs(a - b)) <= 1e-11
        assert sa.iterations < sb.iterations

    @pytest.mark.parametrize("predictor", ["auto", "euler", "previous"])
    def test_predictors_converge(self, predictor):
        spec = default_spec("Nls", N=32)
        system = build_problem(spec)
        u0 = initial_condition(spec, system)
        u1, st = avf_step(system, u0, 0.05, ImplicitSolveConfig(predictor=predictor))
        assert st.residual <= 1e-12

    def test_nonconvergence_reports(self):
        spec = default_spec("AllenCahn", N=20)
        system = build_problem(spec)
        with pytest.raises(NonConvergence) as exc:
            avf_step(system, initial_condition(spec, system), 0.001, ImplicitSolveConfig(max_iter=1, tol=1e-300))
        assert exc.value.iterations == 1 and exc.value.residual > 0

    def test_constant_jacobian_factorized_once(self, monkeypatch):
        import avflab.solve as solve

        calls = []
        real = solve.factorize
        monkeypatch.setattr(solve, "factorize", lambda J: calls.append(1) or real(J))
        system = build_problem(default_spec("Heat"))
        stepper = Stepper(AvfScheme(system), 0.0025)
        u = initial_condition(default_spec("Heat"), system)
        for _ in range(5):
            u, _ = stepper.step(u)
        assert len(calls) == 1


class TestImplicitSolve:
    def test_affine_one_newton_iteration(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
        b = rng.standard_normal(5)
        u, st = implicit_solve(lambda u: A @ u - b, np.zeros(5), ImplicitSolveConfig(), jacobian=lambda u: A)
        assert st.iterations == 1
        np.testing.assert_allclose(A @ u, b, atol=1e-12)

    def test_affine_with_fd_jacobian(self):
        A = np.array([[3.0, 1.0], [0.0, 2.0]])
        u, st = implicit_solve(lambda u: A @ u - 1.0, np.zeros(2))
        assert st.residual <= 1e-12 and st.iterations <= 3

    def test_already_converged(self):
        g = np.array([1.0, 2.0])
        u, st = implicit_solve(lambda u: u - g, g.copy())
        assert st.iterations == 0 and np.all(u == g)

    def test_fixed_point_heat_diverges(self):
        system = build_problem(default_spec("Heat"))
        u0 = initial_condition(default_spec("Heat"), system)
        with pytest.raises(NonConvergence):
            avf_step(system, u0, 1.0, ImplicitSolveConfig(method="fixed_point"))

    def test_singular_jacobian(self):
        with pytest.raises(SingularJacobian):
            implicit_solve(lambda u: np.array([u[0] ** 2 + 1.0, 0.0 * u[1] + 1.0]), np.zeros(2),
                           jacobian=lambda u: np.zeros((2, 2)))
        with pytest.raises(SingularJacobian):
            implicit_solve(lambda u: u + 1.0, np.zeros(3), jacobian=lambda u: sp.csr_matrix((3, 3)))

    @pytest.mark.parametrize("kw", [dict(method="bogus"), dict(tol=0.0), dict(max_iter=0), dict(predictor="x")])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            ImplicitSolveConfig(**kw)


def test_gauss_points_integrate_polynomials():
    for m in range(1, 9):
        x, w = gauss_points(m)
        assert np.all((x > 0) & (x < 1))
        for d in range(2 * m):
            assert w @ x**d == pytest.approx(1.0 / (d + 1), rel=1e-13)
