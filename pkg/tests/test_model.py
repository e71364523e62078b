import pytest

from gradedvar.errors import ModelError
from gradedvar.model import Model, load_model, parse_model
from gradedvar.ring import GradedScalar, Kind

from conftest import MODELS, S


def test_vector_family_expands():
    decl = parse_model("base t x\nfield A[mu] even\n")
    assert list(decl.fields) == ["A_t", "A_x"]
    assert not decl.aliases


def test_antisymmetric_family():
    decl = parse_model("base t x y\nfield B[mu,nu] even antisymmetric\n")
    assert list(decl.fields) == ["B_tx", "B_ty", "B_xy"]
    assert decl.aliases["B_xt"] == (-1, "B_tx")
    assert decl.aliases["B_tt"] == (0, None)


def test_symmetric_family():
    decl = parse_model("base t x\nfield g[mu,nu] even symmetric\n")
    assert list(decl.fields) == ["g_tt", "g_tx", "g_xx"]
    assert decl.aliases["g_xt"] == (1, "g_tx")


def test_aliases_evaluate_with_sign(twoform):
    B = twoform.decl.fields
    m = Model.from_text("base t x y\nfield B[mu,nu] odd antisymmetric\nform: B_yx + B_tt + d(B_xt,y)\n")
    f = m.form().as_scalar()
    assert f == -(S(m.decl.fields["B_xy"]) + S(m.decl.fields["B_tx"].jet(2)))
    assert B["B_tx"].odd is False and m.decl.fields["B_tx"].odd is True


def test_odd_field_and_comments():
    m = Model.from_text("base x  # one dimension\nfield c odd\nfield u even\nlagrangian: c*d(c,x)*u  # ghost kinetic\n")
    assert m.decl.fields["c"].odd
    assert m.lagrangian().density == S(m.decl.fields["c"]) * S(m.decl.fields["c"].jet(0)) * S(m.decl.fields["u"])


def test_continuation_lines(twoform):
    (chi,) = [op for op in twoform.identities() if op.stage == 1]
    assert chi.name == "chi"
    assert len(chi.expression.terms) == 3


def test_identity_names_become_ghosts(twoform):
    m = Model.from_text(
        (MODELS / "twoform.model").read_text() + "form: d(chi,t) * dx(x) + bar(xi_t)*dx(y)\n"
    )
    phi = m.form()
    ghosts = {s.kind for s in phi.jet_symbols()}
    assert Kind.GHOST in ghosts and Kind.ANTIFIELD in ghosts


def test_density_times_volume():
    m = load_model(MODELS / "exact_density.model")
    phi = m.form()
    assert phi.bidegrees() == {(0, 2)}


def test_regularity_flag(maxwell):
    assert maxwell.decl.regularity
    assert not Model.from_text("base x\nfield u even\nlagrangian: u^2\n").decl.regularity


def test_vector_components():
    m = load_model(MODELS / "translation.model")
    up = m.derivation()
    assert up.vertical[m.decl.fields["u"]] == GradedScalar.const(1, 1)
    assert not up.horizontal
    m2 = Model.from_text("base t x\nfield u even\nvector t: 1\nvector u: d(u,x)\n")
    up2 = m2.derivation()
    assert 0 in up2.horizontal and m2.decl.fields["u"] in up2.vertical


@pytest.mark.parametrize(
    "text, pos, msg",
    [
        ("field u even\nbase x\n", (1, 1), "base declaration must come first"),
        ("base x\nfield u purple\n", (2, 9), "parity"),
        ("base x\nfield u even\nfield u odd\n", (3, 7), "already declared"),
        ("base x\nfield x even\n", (2, 7), "already declared"),
        ("base x\nfield u even\nlagrangian: u*w\n", (3, 15), "undeclared identifier"),
        ("base x\nfield u even\nlagrangian: (u + 1\n", (3, 13), "unbalanced"),
        ("base x\nfield u even\nlagrangian: u + #\n", (3, 16), "end of expression"),
        ("base x\nfield c odd\nlagrangian: c\n", (3, 1), "even"),
        ("base x\nfield u even\nfrobnicate u\n", (3, 1), "unknown declaration"),
        ("base x\nfield u even\nidentity k stage 1: bar(u)\n", (3, 1), "stage by stage"),
        ("base x\nfield u even\nidentity u stage 0: bar(u)\n", (3, 1), "clashes"),
        ("base x\nfield u even\nvector w: 1\n", (3, 1), "not a field or coordinate"),
        ("  u\nbase x\n", (1, 1), "continuation"),
        ("base x\nfield c odd\nform: c*c\n", (3, 8), "vanishes"),
    ],
)
def test_model_errors(text, pos, msg):
    with pytest.raises(ModelError, match=msg) as err:
        Model.from_text(text)
    assert (err.value.line, err.value.column) == pos


def test_max_jet_order():
    text = "base x\nfield u even\nlagrangian: d(u,x,x,x)^2\n"
    assert Model.from_text(text, max_jet_order=3)
    with pytest.raises(ModelError, match="max-jet-order"):
        Model.from_text(text, max_jet_order=2)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_model(MODELS / "nope.model")


def test_accessor_errors():
    m = Model.from_text("base x\nfield u even\n")
    for call in (m.lagrangian, m.tower, m.derivation, m.form):
        with pytest.raises(ModelError):
            call()
