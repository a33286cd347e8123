import numpy as np
import pytest

from parakahler.calculus import (
    Chart,
    christoffel,
    connection_one_forms,
    covariant_derivative_field,
    curvature_fd,
    d_one_form,
    d_two_form,
    estimate_nu,
    nabla_J,
    partials,
    structure_eq_residuals,
    wedge11,
    wedge21,
)
from parakahler.curvature import r0_eval, scal
from parakahler.exceptions import ChartValidationError
from parakahler.linear import make_standard_basis
from parakahler.models import flat_space, projective_chart


def test_partials_exact_on_quartics():
    f = lambda x: np.array([x[0] ** 4 - 2 * x[0] * x[1] ** 2, x[1] ** 3])
    x = np.array([0.7, -1.3])
    D = partials(f, x)
    expected = np.array([[4 * x[0] ** 3 - 2 * x[1] ** 2, 0.0],
                         [-4 * x[0] * x[1], 3 * x[1] ** 2]])
    assert np.allclose(D, expected, atol=1e-9)


def test_christoffel_polar():
    metric = lambda x: np.diag([1.0, x[0] ** 2])
    r = 1.7
    G = christoffel(metric, np.array([r, 0.3]))
    assert G[0, 1, 1] == pytest.approx(-r, abs=1e-9)
    assert G[1, 0, 1] == pytest.approx(1 / r, abs=1e-9)
    assert G[1, 1, 0] == pytest.approx(1 / r, abs=1e-9)
    assert abs(G[0, 0, 0]) < 1e-12


def test_curvature_of_round_sphere():
    metric = lambda x: np.diag([1.0, np.sin(x[0]) ** 2])
    R = curvature_fd(metric, np.array([1.1, 0.4]))
    assert scal(R) == pytest.approx(2.0, abs=1e-6)
    assert max(R.symmetry_residuals().values()) < 1e-6


def test_estimate_nu_on_model():
    space, basis = make_standard_basis(2, 1)
    assert estimate_nu(r0_eval(basis, space.g, 2.5)) == pytest.approx(2.5)


def test_flat_connection_vanishes(eps):
    chart = flat_space(2, eps)
    x = np.linspace(-0.2, 0.2, 8)
    assert np.abs(nabla_J(chart, x)).max() == 0.0
    cf = connection_one_forms(chart, x)
    assert np.abs(cf.omega).max() == 0.0 and cf.residual == 0.0


def test_twisted_flat_has_connection_forms(eps):
    chart = flat_space(1, eps, twist=0.5)
    x = np.array([0.1, -0.2, 0.05, 0.15])
    cf = connection_one_forms(chart, x, tol=1e-4)
    assert cf.residual < 1e-8
    # rotating (J2, J3) by 0.5 * sum(x) gives omega_1 = +-0.5 dx^i
    assert np.allclose(np.abs(cf.omega[0]), 0.5, atol=1e-8)
    assert np.abs(cf.omega[1:]).max() < 1e-8
    r = structure_eq_residuals(chart, x, nu=0.0)
    assert max(r["curvature"] + r["integrability"]) < 1e-8


def test_non_parallel_structure_is_rejected():
    space, basis = make_standard_basis(2, -1)
    stack = np.stack(basis.Js)

    def J_fields(x):
        # isometric boost mixing slot 1's real part with slot 2's J part;
        # for n >= 2 it does not normalize Q, so the conjugated structure varies
        c, s = np.cosh(x[0]), np.sinh(x[0])
        P = np.eye(8)
        P[np.ix_([0, 6], [0, 6])] = [[c, s], [s, c]]
        return np.einsum("ij,ajk,kl->ail", P, stack, np.linalg.inv(P))

    chart = Chart(8, lambda x: space.g, J_fields, basis.eps)
    x = np.array([0.2, 0.0, 0.1, 0.0, 0.0, 0.1, 0.0, 0.0])
    chart.basis(x).check(space.g)
    with pytest.raises(ChartValidationError):
        connection_one_forms(chart, x, tol=1e-4)


@pytest.mark.parametrize("n", [1, 2])
def test_projective_structure_equations(n, eps):
    chart = projective_chart(n, eps)
    x = np.full(4 * n, 0.1)
    r = structure_eq_residuals(chart, x)
    assert r["nu"] == pytest.approx(4.0, rel=1e-6)
    assert max(r["curvature"] + r["integrability"]) < 1e-3


def test_metric_is_parallel():
    chart = projective_chart(1, -1)
    x = np.array([0.1, -0.2, 0.15, 0.05])
    assert np.abs(covariant_derivative_field(chart, chart.metric, "dd", x)).max() < 1e-8
    with pytest.raises(ValueError):
        covariant_derivative_field(chart, chart.metric, "d", x)
    with pytest.raises(ValueError):
        covariant_derivative_field(chart, chart.metric, "dx", x)


def test_covariant_derivative_contracts_direction():
    chart = projective_chart(1, 1)
    x = np.array([0.1, -0.2, 0.15, 0.05])
    J1 = lambda y: chart.J_fields(y)[0]
    full = covariant_derivative_field(chart, J1, "ud", x)
    X = np.array([1.0, 2.0, -1.0, 0.5])
    assert np.allclose(covariant_derivative_field(chart, J1, "ud", x, X=X),
                       np.tensordot(X, full, axes=(0, 0)))


def test_exterior_derivative_squares_to_zero():
    f = lambda x: np.sin(x[0]) * x[1] ** 2 + x[2] * x[0]
    x = np.array([0.3, -0.4, 0.8])
    df = lambda y: partials(f, y)
    assert np.abs(d_one_form(df, x)).max() < 1e-8
    w = lambda y: np.array([y[1] * y[2], np.cos(y[0]), y[0] ** 2 * y[1]])
    dw = lambda y: d_one_form(w, y)
    assert np.abs(d_two_form(dw, x)).max() < 1e-6


def test_wedges():
    a, b = np.eye(3)[0], np.eye(3)[1]
    assert np.array_equal(wedge11(a, b), -wedge11(b, a))
    F = wedge11(a, b)
    T = wedge21(F, np.eye(3)[2])
    assert T[0, 1, 2] == 1.0 and T[1, 0, 2] == -1.0 and T[2, 0, 1] == 1.0


def test_chart_check_point():
    chart = projective_chart(1, -1, scale=-1.0)
    chart.check_point(np.zeros(4))
    with pytest.raises(ValueError):
        chart.check_point(np.zeros(3))
    with pytest.raises(ValueError):
        chart.check_point(np.array([2.0, 0.0, 0.0, 0.0]))
