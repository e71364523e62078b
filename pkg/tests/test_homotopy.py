import pytest
from hypothesis import given, strategies as st

from gradedvar.errors import BidegreeError, NotClosedError
from gradedvar.forms import GradedForm, horizontal_volume, wedge
from gradedvar.homotopy import (
    _bar,
    d_plus_scalar,
    fiber_decompose,
    homotopy_contact,
    homotopy_density,
    homotopy_horizontal,
    homotopy_olver,
    homotopy_rho_kernel,
)
from gradedvar.ring import GradedScalar, Kind, coordinate, field, total_derivative
from gradedvar.variational import d_horizontal, rho_projector

from conftest import C, S, form, half, scalars

th = GradedForm.theta


def test_fiber_decompose_examples():
    u = field("u", 1)
    dx = GradedForm.dx(1, 0)
    ux2 = S(u.jet(0)) ** 2
    phi = wedge(form(C(1, 1) + ux2), dx)
    assert fiber_decompose(phi) == (dx, wedge(form(ux2), dx))
    assert fiber_decompose(dx) == (dx, GradedForm.zero(1))
    assert fiber_decompose(wedge(form(S(u)), dx)) == (GradedForm.zero(1), wedge(form(S(u)), dx))


def test_horizontal_round_trip_example():
    u = field("u", 2)
    phi = d_horizontal(wedge(form(S(u)), GradedForm.dx(2, 0)))
    assert phi.bidegrees() == {(0, 2)}
    phi = d_horizontal(form(S(u)))
    assert d_horizontal(homotopy_horizontal(phi)) == phi


def test_horizontal_with_base_part():
    x, y = S(coordinate(0, 2)), S(coordinate(1, 2))
    u = field("u", 2)
    # d_H(x*y + x*u) includes a jet-free part
    phi = d_horizontal(form(x * y + x * S(u)))
    assert d_horizontal(homotopy_horizontal(phi)) == phi


def test_horizontal_zero_and_errors():
    assert not homotopy_horizontal(GradedForm.zero(2))
    u = field("u", 2)
    with pytest.raises(NotClosedError) as err:
        homotopy_horizontal(wedge(form(S(u)), GradedForm.dx(2, 0)))
    assert err.value.witness
    with pytest.raises(BidegreeError):
        homotopy_horizontal(wedge(form(S(u)), horizontal_volume(2)))


def test_density_examples():
    u = field("u", 1)
    ux, uxx = S(u.jet(0)), S(u.jet(0, 0))
    phi = wedge(form(ux * uxx), GradedForm.dx(1, 0))
    for op in (homotopy_density, homotopy_olver):
        xi = op(phi)
        assert d_horizontal(xi) == phi
        assert xi == form(half(ux * ux))
        assert not op(GradedForm.zero(1))


def test_density_odd_example():
    c = field("c", 1, True)
    phi = wedge(form(total_derivative(S(c) * S(c.jet(0)), 0)), GradedForm.dx(1, 0))
    assert phi == wedge(form(S(c) * S(c.jet(0, 0))), GradedForm.dx(1, 0))
    for op in (homotopy_density, homotopy_olver):
        assert d_horizontal(op(phi)) == phi


def test_density_not_trivial():
    u = field("u", 1)
    phi = wedge(form(S(u) * S(u.jet(0, 0))), GradedForm.dx(1, 0))
    with pytest.raises(NotClosedError) as err:
        homotopy_density(phi)
    assert err.value.witness


def test_contact_examples():
    n = 2
    u = field("u", n)
    f = S(u) * S(u.jet(1)) + S(coordinate(0, n))
    phi = d_horizontal(wedge(form(f), th(u)))
    assert d_horizontal(homotopy_contact(phi)) == phi
    assert not homotopy_contact(GradedForm.zero(n))


def test_contact_barred_image_is_linear():
    n = 2
    u, c = field("u", n), field("c", n, True)
    phi = d_horizontal(wedge(form(S(u) * S(u.jet(1))), th(c)))
    barred = _bar(phi)
    xi = homotopy_horizontal(barred, with_base=False)
    for g in (barred, xi):
        for coef in g.terms.values():
            for mono in coef.terms:
                syms = [s for s, e in mono[0] for _ in range(e)] + list(mono[1])
                assert sum(1 for s in syms if s.kind == Kind.AUX) == 1


def test_rho_kernel_example():
    u = field("u", 1)
    f = S(u) * S(u.jet(0))
    omega = horizontal_volume(1)
    sigma = wedge(wedge(form(f), th(u.jet(0))), omega) + wedge(wedge(form(total_derivative(f, 0)), th(u)), omega)
    assert not rho_projector(sigma)
    xi = homotopy_rho_kernel(sigma)
    assert d_horizontal(xi) == sigma
    # with theta written before omega, d_H(f theta^u) = -sigma
    assert xi == -wedge(form(f), th(u))
    assert not homotopy_rho_kernel(GradedForm.zero(1))


def test_rho_kernel_rejects():
    u = field("u", 1)
    sigma = wedge(th(u), horizontal_volume(1))
    with pytest.raises(NotClosedError) as err:
        homotopy_rho_kernel(sigma)
    assert err.value.witness == sigma


# -- properties

N = 2


@given(scalars(N), st.integers(0, N - 1), st.integers(0, N - 1))
def test_d_plus_commutator(f, nu, mu):
    tilde = fiber_decompose(form(f))[1].as_scalar() if f else f
    lhs = d_plus_scalar(total_derivative(tilde, mu), nu) - total_derivative(d_plus_scalar(tilde, nu), mu)
    assert lhs == (tilde if nu == mu else GradedScalar.zero(N))


@given(st.lists(scalars(N, max_terms=2, max_degree=2), min_size=N, max_size=N))
def test_density_and_olver_agree(currents):
    xi = GradedForm.zero(N)
    for mu, J in enumerate(currents):
        xi = xi + wedge(form(J), horizontal_volume(N, mu))
    phi = d_horizontal(xi)
    a, b = homotopy_density(phi), homotopy_olver(phi)
    assert d_horizontal(a) == phi == d_horizontal(b)


@given(scalars(3, max_terms=2, max_degree=2, max_order=1), st.integers(0, 2))
def test_horizontal_round_trip_n3(f, lam):
    phi = d_horizontal(wedge(form(f), GradedForm.dx(3, lam)))
    assert d_horizontal(homotopy_horizontal(phi)) == phi
    assert d_horizontal(homotopy_olver(phi)) == phi
