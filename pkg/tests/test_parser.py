from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gradedvar.checks import _Scope, check_roundtrip
from gradedvar.errors import ModelError
from gradedvar.forms import GradedForm, wedge
from gradedvar.parser import Binary, Power, Sum, evaluate, parse, tokenize
from gradedvar.printer import pretty_print
from gradedvar.randomgen import RandomGenerator
from gradedvar.ring import GradedScalar, field

from conftest import S, forms, half, scalars, symbol_pool

U = field("u", 2)
FIELDS, _ = symbol_pool(2)
SCOPE = _Scope(2, FIELDS)


def ev(text, scope=SCOPE):
    return evaluate(parse(text), scope)


def test_half_square():
    ux = S(U.jet(0))
    assert ev("1/2 * d(u,x)*d(u,x)") == half(ux * ux)
    assert ev("1/2*d(u,x)^2") == half(ux * ux)


def test_contact_wedge_dx():
    phi = ev("theta(u,x) ^ dx(x)")
    assert isinstance(phi, GradedForm)
    assert phi.bidegrees() == {(1, 1)}
    assert phi == wedge(GradedForm.theta(U.jet(0)), GradedForm.dx(2, 0))


def test_odd_square_flagged():
    with pytest.raises(ModelError) as err:
        ev("c * c")
    assert (err.value.line, err.value.column) == (1, 3)
    with pytest.raises(ModelError):
        ev("c^2")
    with pytest.raises(ModelError):
        ev("(c*d(b,x))^2")
    assert ev("c^1") == S(FIELDS[2])


def test_mixed_parity_power_is_fine():
    c = S(FIELDS[2])
    assert ev("(1 + c)^2") == GradedScalar.const(2, 1) + c.scale(2)


def test_power_binds_tighter_than_product():
    node = parse("2*u^3")
    assert isinstance(node, Binary) and isinstance(node.right, Power)
    assert ev("2*u^3") == S(U) ** 3 * GradedScalar.const(2, 2)


def test_caret_without_integer_is_wedge():
    assert ev("dx(x) ^ dx(y)") == -ev("dx(y) ^ dx(x)")
    with pytest.raises(ModelError, match="vanishes"):
        ev("dx(x) ^ dx(x)")
    node = parse("dx(x) ^ (dx(y))")
    assert isinstance(node, Binary) and node.op == "^"


def test_sum_structure():
    node = parse("u - v + c*b")
    assert isinstance(node, Sum)
    assert [sign for sign, _ in node.terms] == [1, -1, 1]


def test_jets_commute_in_index():
    assert ev("d(u,x,y)") == ev("d(u,y,x)")
    assert ev("d(u,x,x)") == S(U.jet(0, 0))


def test_division_by_constant_only():
    assert ev("u/4") == S(U, Fraction(1, 4))
    with pytest.raises(ModelError, match="1:2"):
        ev("1/u")
    with pytest.raises(ModelError):
        ev("u/0")


@pytest.mark.parametrize(
    "text, pos",
    [
        ("u + $", (1, 5)),
        ("(u + v", (1, 1)),
        ("u + w", (1, 5)),
        ("d(u, z)", (1, 6)),
        ("u +", (1, 4)),
        ("bar(x)", (1, 1)),
        ("d(u,x", (1, 2)),
    ],
)
def test_error_positions(text, pos):
    with pytest.raises(ModelError) as err:
        ev(text)
    assert (err.value.line, err.value.column) == pos
    assert str(err.value).startswith(f"{pos[0]}:{pos[1]}:")


def test_segments_keep_positions():
    segs = [(3, 12, "u +"), (4, 1, "   v * $")]
    with pytest.raises(ModelError) as err:
        parse(segs)
    assert (err.value.line, err.value.column) == (4, 8)
    toks = tokenize([(3, 12, "u +"), (4, 1, "   v")])
    assert [(t.line, t.column) for t in toks[:3]] == [(3, 12), (3, 14), (4, 4)]


def test_print_zero():
    assert pretty_print(GradedScalar.zero(2)) == "0"
    assert pretty_print(GradedForm.zero(2)) == "0"


def test_print_half_square():
    assert pretty_print(half(S(U.jet(0)) ** 2)) == "1/2*d(u,x)^2"


@given(scalars(n=2))
def test_scalar_roundtrip(f):
    assert ev(pretty_print(f)) == f


@given(forms(n=2))
def test_form_roundtrip(phi):
    back = ev(pretty_print(phi))
    if not isinstance(back, GradedForm):
        back = GradedForm.scalar(back)
    assert back == phi


@given(st.integers(0, 10**6))
def test_generated_roundtrip(seed):
    assert check_roundtrip(RandomGenerator(seed)) is None
