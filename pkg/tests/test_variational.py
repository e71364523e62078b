from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gradedvar.errors import BidegreeError, GradedVarError
from gradedvar.forms import GradedForm, contact_part, horizontal_volume, wedge
from gradedvar.ring import GradedScalar, coordinate, field, total_derivative
from gradedvar.variational import (
    GradedDerivation,
    Lagrangian,
    d,
    d_horizontal,
    d_vertical,
    delta,
    euler_lagrange,
    exterior_derivative,
    first_variational_check,
    is_variational_symmetry,
    lepage_equivalent,
    lie_derivative,
    prolong,
    rho_projector,
)

from conftest import C, S, form, forms, half, scalars

n = 1
u = field("u", n)
c = field("c", n, True)
ux, uxx = u.jet(0), u.jet(0, 0)
dx = GradedForm.dx(n, 0)
omega = horizontal_volume(n)
th = GradedForm.theta


def L_of(f):
    return Lagrangian(f)


def free():
    return Lagrangian(half(S(ux) ** 2), (u,))


def test_d_vertical_examples():
    assert d_vertical(form(S(u))) == th(u)
    assert d_vertical(form(S(ux) ** 2)) == wedge(form(2 * S(ux)), th(ux))
    got = d_vertical(form(S(c) * S(c.jet(0))))
    # theta^c c_x - theta^c_x c, written coefficient-left
    expected = wedge(th(c), form(S(c.jet(0)))) - wedge(th(c.jet(0)), form(S(c)))
    assert got == expected


def test_d_horizontal_examples():
    assert d_horizontal(form(S(u))) == wedge(form(S(ux)), dx)
    assert d_horizontal(th(u)) == wedge(dx, th(ux))


@given(scalars(2))
def test_d_horizontal_squared_on_scalars(f):
    assert not d_horizontal(d_horizontal(form(f)))


def test_rho_examples():
    f = S(u) * S(ux)
    fixed = wedge(wedge(form(f), th(u)), omega)
    assert rho_projector(fixed) == fixed
    moved = wedge(wedge(form(f), th(ux)), omega)
    assert rho_projector(moved) == -wedge(wedge(form(total_derivative(f, 0)), th(u)), omega)
    with pytest.raises(BidegreeError):
        rho_projector(form(f))


def test_euler_lagrange_examples():
    assert euler_lagrange(free())[u] == -S(uxx)
    assert euler_lagrange(L_of(S(u)))[u] == C(1, 1)
    assert euler_lagrange(L_of(S(c) * S(c.jet(0))))[c] == 2 * S(c.jet(0))
    total = total_derivative(S(u) * S(ux), 0)
    assert not euler_lagrange(L_of(total))[u]


def test_euler_lagrange_form_matches_delta():
    L = free()
    res = euler_lagrange(L)
    assert res.form == delta(L.form)
    assert res.form == wedge(wedge(th(u), form(-S(uxx))), omega)


def test_odd_lagrangian_rejected():
    with pytest.raises(GradedVarError):
        Lagrangian(S(c))


def test_lepage_examples():
    L = free()
    xi = lepage_equivalent(L)
    assert xi == wedge(form(half(S(ux) ** 2)), dx) + wedge(th(u), form(S(ux)))
    assert lepage_equivalent(L_of(S(u))) == wedge(form(S(u)), dx)


def test_prolong_examples():
    x = S(coordinate(0, 1))
    pr = prolong(GradedDerivation(1, vertical={u: C(1, 1)}))
    assert pr.vertical(u) == C(1, 1)
    assert not pr.vertical(ux)
    pr = prolong(GradedDerivation(1, vertical={u: x}))
    assert pr.vertical(ux) == C(1, 1)
    pr = prolong(GradedDerivation(1, horizontal={0: C(1, 1)}))
    assert pr.vertical_part_coefficient(u) == -S(ux)
    assert pr.vertical_part_coefficient(ux) == -S(uxx)


@given(st.sampled_from([0, 1]), scalars(1, parity=0, max_order=1), scalars(1, max_order=1))
def test_prolongation_preserves_contact_ideal(which, h, v):
    A = [field("u", 1), field("c", 1, True)][which]
    v = v.split_parity()[A.odd]
    up = GradedDerivation(1, horizontal={0: h.split_parity()[0]} if not h.jet_symbols() else {},
                          vertical={A: v}, parity=0)
    pr = prolong(up)
    for s in (A, A.jet(0)):
        assert not contact_part(lie_derivative(pr, th(s)), 0)


def test_lie_derivative_examples():
    L = free()
    assert not lie_derivative(prolong(GradedDerivation(1, vertical={u: C(1, 1)})), L.form)
    got = lie_derivative(prolong(GradedDerivation(1, vertical={u: S(u)})), L.form)
    assert got == wedge(form(S(ux) ** 2), dx)


def test_first_variation_trivial_cases():
    up = GradedDerivation(1, vertical={u: S(u)})
    assert not first_variational_check(Lagrangian(GradedScalar.zero(1), (u,)), up)
    assert not first_variational_check(free(), up)


def test_symmetry_examples():
    L = free()
    res = is_variational_symmetry(L, GradedDerivation(1, vertical={u: C(1, 1)}))
    assert res.holds and res.current == form(S(ux))
    res = is_variational_symmetry(L, GradedDerivation(1, vertical={u: S(u)}))
    assert not res.holds
    # delta(u_x^2 omega) = -2 u_xx theta^u ^ omega
    assert res.witness == wedge(wedge(th(u), form(-2 * S(uxx))), omega)
    res = is_variational_symmetry(L, GradedDerivation(1))
    assert res.holds and not res.sigma


def test_translation_current():
    res = is_variational_symmetry(free(), GradedDerivation(1, horizontal={0: C(1, 1)}))
    assert res.holds
    assert res.current == form(-half(S(ux) ** 2))


def test_non_projectable_rejected():
    res = is_variational_symmetry(free(), GradedDerivation(1, horizontal={0: S(u)}))
    assert not res.holds and "projectable" in res.reason


# -- properties

N = 2


@given(forms(N))
def test_bicomplex_relations(phi):
    assert not d_horizontal(d_horizontal(phi))
    assert not d_vertical(d_vertical(phi))
    assert not d_horizontal(d_vertical(phi)) + d_vertical(d_horizontal(phi))
    assert d(phi) == exterior_derivative(phi)


@given(forms(N, k=1, m=N), forms(N, k=1, m=N - 1))
def test_projector_properties(phi, psi):
    r = rho_projector(phi)
    if r:
        assert rho_projector(r) == r
    dpsi = d_horizontal(psi)
    if dpsi:
        assert not rho_projector(dpsi)


@given(scalars(N, parity=0))
def test_lepage_identity(f):
    L = Lagrangian(f)
    assert d(L.form) == delta(L.form) - d_horizontal(lepage_equivalent(L))


@given(scalars(N))
def test_total_divergence_is_trivial(f):
    f = f.split_parity()[0]
    xi = GradedForm.zero(N)
    for mu in range(N):
        xi = xi + wedge(form(total_derivative(f, mu) if mu else f), horizontal_volume(N, mu))
    dens = d_horizontal(xi)
    if dens:
        assert not delta(dens)


@given(st.lists(scalars(N, parity=0, max_order=1), min_size=4, max_size=4), scalars(N, parity=0, max_order=1))
def test_integration_by_parts_is_trivial(coeffs, phi):
    from gradedvar.ring import total_derivative_multi

    idxs = [(0, 0), (1, 0), (0, 1), (1, 1)]
    dens = GradedScalar.zero(N)
    for idx, f in zip(idxs, coeffs):
        sign = -1 if sum(idx) % 2 else 1
        dens = dens + f * total_derivative_multi(phi, idx) - (total_derivative_multi(f, idx) * phi).scale(sign)
    if dens:
        assert not delta(wedge(form(dens), horizontal_volume(N)))


@given(scalars(N, parity=0), scalars(N, parity=0, max_order=1), scalars(N, parity=1, max_order=1),
       st.booleans())
def test_first_variational_formula(f, h, v, horizontal):
    u2, c2 = field("u", N), field("c", N, True)
    hor = {0: h.split_parity()[0]} if horizontal else {}
    up = GradedDerivation(N, horizontal=hor, vertical={u2: h, c2: v}, parity=0)
    assert not first_variational_check(Lagrangian(f), up)
