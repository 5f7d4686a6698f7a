import numpy as np
import pytest
from scipy import integrate as sint

from kgewi.grid import build_grid, forward_dft, inverse_dft
from kgewi.problem import (
    ConstantNonlinearity,
    CubicNonlinearity,
    FunctionNonlinearity,
    InitialData,
    KGEProblem,
    PolynomialNonlinearity,
    SolverState,
    cosine,
    energy,
    gaussian,
    initial_state,
    nonlinearity_field,
    preset,
    zero,
)

U = np.linspace(-4, 4, 41)


@pytest.mark.parametrize("nl", [CubicNonlinearity(1.0), CubicNonlinearity(-2.5),
                                PolynomialNonlinearity([0.3, -1.0, 0.5, 0.2, -0.1]),
                                ConstantNonlinearity(1.7)])
def test_derivative_chain_finite_differences(nl):
    h = 1e-5
    for k in range(1, 5):
        fd = (nl.derivative(U + h, k - 1) - nl.derivative(U - h, k - 1)) / (2 * h)
        exact = nl.derivative(U, k)
        scale = max(np.max(np.abs(exact)), 1.0)
        assert np.max(np.abs(fd - exact)) / scale < 1e-6
    fd = (nl.antiderivative(U + h) - nl.antiderivative(U - h)) / (2 * h)
    assert np.max(np.abs(fd - 2 * nl(U))) / max(np.max(np.abs(nl(U))), 1.0) < 1e-6


def test_cubic_closed_forms():
    lam = 1.3
    nl = CubicNonlinearity(lam)
    fs = nl.derivatives(U, 4)
    expect = [lam * U**3, 3 * lam * U**2, 6 * lam * U, np.full_like(U, 6 * lam), np.zeros_like(U)]
    for a, b in zip(fs, expect):
        assert np.allclose(a, b, rtol=1e-15, atol=0)
    assert np.allclose(nl.antiderivative(U), lam * U**4 / 2, rtol=1e-15, atol=0)
    generic = PolynomialNonlinearity([0, 0, 0, lam])
    for k in range(5):
        assert np.allclose(generic.derivative(U, k), fs[k], rtol=1e-14, atol=1e-14)
    with pytest.raises(ValueError):
        nl.derivatives(U, 5)
    with pytest.raises(ValueError):
        nl.derivative(U, 5)


def test_constant_nonlinearity_shapes():
    nl = ConstantNonlinearity(2.0)
    assert nl(U).shape == U.shape
    assert np.all(nl(U) == 2.0)
    assert np.all(nl.derivative(U, 1) == 0)
    assert np.allclose(nl.antiderivative(U), 4.0 * U)


def test_function_nonlinearity():
    nl = FunctionNonlinearity([np.sin, np.cos, lambda u: -np.sin(u)], lambda u: 2 * (1 - np.cos(u)), "sine")
    assert np.allclose(nl.derivative(U, 2), -np.sin(U))
    with pytest.raises(ValueError):
        nl.derivative(U, 3)
    assert nl.key == "func:sine"


def test_nonlinearity_field_examples():
    g = build_grid(0, 1, 8)
    p = KGEProblem.gaussian_benchmark(0.5)
    assert np.all(nonlinearity_field(p, g, np.full(8, 2.0), 0) == 8.0)
    assert np.all(nonlinearity_field(p, g, np.full(8, 2.0), 1) == 12.0)
    pm = KGEProblem(0.5, CubicNonlinearity(-1.0), zero(), zero())
    u = np.random.default_rng(0).standard_normal(8)
    assert np.allclose(nonlinearity_field(pm, g, u, 2), -6 * u, rtol=1e-15)
    with pytest.raises(ValueError):
        nonlinearity_field(p, g, np.zeros(7), 0)
    with pytest.raises(ValueError):
        nonlinearity_field(p, g, u, 5)


def test_presets():
    x = np.linspace(-3, 3, 7)
    assert np.allclose(gaussian(2.0)(x), 2 * np.exp(-x**2))
    assert np.allclose(gaussian(1.0, width=2.0, center=1.0)(x), np.exp(-((x - 1) / 2) ** 2))
    assert np.allclose(cosine(3.0, 2.0)(x), 3 * np.cos(2 * x))
    assert np.all(zero()(x) == 0)
    assert preset("gaussian", amplitude=3.0) == gaussian(3.0)
    assert preset("gaussian", amplitude=3.0).key == "gaussian(amplitude=3.0,width=1.0,center=0.0)"
    with pytest.raises(ValueError):
        preset("tophat")


def test_problem_validation_and_callables():
    with pytest.raises(ValueError):
        KGEProblem(0.0, CubicNonlinearity(), zero(), zero())
    p = KGEProblem(1.0, CubicNonlinearity(), lambda x: np.sin(x), zero())
    assert isinstance(p.phi1, InitialData)
    with pytest.raises(TypeError):
        KGEProblem(1.0, CubicNonlinearity(), 3.0, zero())


def test_initial_state_gaussian_data():
    g = build_grid(-32, 32, 1024)
    p = KGEProblem.gaussian_benchmark(0.5)
    s = initial_state(p, g)
    assert s.t == 0
    assert np.allclose(inverse_dft(g, s.udot), 12 * np.exp(-g.x**2), rtol=0, atol=1e-13)
    assert np.allclose(inverse_dft(g, s.u), 2 * np.exp(-g.x**2), rtol=0, atol=1e-14)


def test_initial_state_zero_and_single_mode():
    g = build_grid(-32, 32, 64)
    s = initial_state(KGEProblem(0.3, CubicNonlinearity(), zero(), zero()), g)
    assert not s.u.any() and not s.udot.any()
    mode = InitialData("mode1", (), lambda x: np.cos(g.mu[1] * (x - g.a)))
    s = initial_state(KGEProblem(1.0, PolynomialNonlinearity([0.0]), mode, zero()), g)
    nz = np.flatnonzero(np.abs(s.u) > 1e-14)
    assert sorted(g.l[nz]) == [-1, 1]


def test_energy_zero_and_single_mode():
    g = build_grid(-32, 32, 64)
    p = KGEProblem(1.0, PolynomialNonlinearity([0.0]), zero(), zero())
    assert energy(p, g, SolverState(np.zeros(64, complex), np.zeros(64, complex))) == 0
    c = np.zeros(64, complex)
    c[1] = c[-1] = 0.5
    mu1 = g.mu[1]
    assert energy(p, g, SolverState(c, np.zeros(64, complex))) == pytest.approx(32 * (mu1**2 + 1), rel=1e-14)


def test_energy_matches_adaptive_quadrature():
    eps, lam = 0.05, 1.0
    g = build_grid(-32, 32, 512)
    p = KGEProblem.gaussian_benchmark(eps, lam)
    E = energy(p, g, initial_state(p, g))

    def density(x):
        phi1 = 2 * np.exp(-x**2)
        dphi1 = -4 * x * np.exp(-x**2)
        ut = 3 * np.exp(-x**2) / eps**2
        return eps**2 * ut**2 + dphi1**2 + phi1**2 / eps**2 + lam * phi1**4 / 2

    oracle = sint.quad(density, -32, 32, points=[0.0], epsabs=0, epsrel=1e-13, limit=200)[0]
    assert E == pytest.approx(oracle, rel=1e-8)


def test_energy_grid_invariance():
    p = KGEProblem.gaussian_benchmark(0.5)
    E = [energy(p, g, initial_state(p, g)) for g in (build_grid(-32, 32, 512), build_grid(-32, 32, 1024))]
    assert abs(E[0] - E[1]) / E[1] < 1e-10


def test_state_copy_is_independent():
    s = SolverState(np.ones(4, complex), np.zeros(4, complex), 0.5)
    t = s.copy()
    t.u[0] = 7
    assert s.u[0] == 1 and t.t == 0.5


def test_forward_dft_of_gaussian_data_is_conjugate_symmetric():
    g = build_grid(-32, 32, 256)
    c = forward_dft(g, gaussian(2.0)(g.x))
    assert np.max(np.abs(c[1:] - np.conj(c[1:][::-1]))) < 1e-16
