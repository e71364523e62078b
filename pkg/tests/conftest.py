from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from gradedvar.forms import GradedForm, wedge
from gradedvar.model import Model
from gradedvar.ring import GradedScalar, coordinate, field

MODELS = Path(__file__).parent / "models"
GOLDEN = Path(__file__).parent / "golden"

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def S(sym, c=1):
    return GradedScalar.symbol(sym, c)


def C(n, c):
    return GradedScalar.const(n, c)


def half(f):
    return f.scale(Fraction(1, 2))


def form(f):
    return GradedForm.scalar(f)


def load(name, **kw):
    return Model.from_file(MODELS / f"{name}.model", **kw)


@pytest.fixture
def maxwell():
    return load("maxwell")


@pytest.fixture
def twoform():
    return load("twoform")


@pytest.fixture
def twoform_h():
    return load("twoform_h")


# -- hypothesis strategies over a fixed symbol pool


def symbol_pool(n, max_order=2):
    from gradedvar.ring import multi_indices

    fields = [field("u", n), field("v", n), field("c", n, True), field("b", n, True)]
    pool = [A.with_index(i) for A in fields for i in multi_indices(n, max_order)]
    return fields, pool + [coordinate(i, n) for i in range(n)]


def _build(n, terms):
    f = GradedScalar.zero(n)
    for c, syms in terms:
        t = GradedScalar.const(n, c)
        for s in syms:
            t = t * GradedScalar.symbol(s)
        f = f + t
    return f


@st.composite
def scalars(draw, n=2, max_terms=4, max_degree=3, parity=None, max_order=2):
    _, pool = symbol_pool(n, max_order)
    mono = st.tuples(st.integers(-3, 3), st.lists(st.sampled_from(pool), max_size=max_degree))
    f = _build(n, draw(st.lists(mono, max_size=max_terms)))
    if parity is not None:
        f = f.split_parity()[parity]
    return f


@st.composite
def forms(draw, n=2, max_terms=3, k=None, m=None, max_order=2):
    fields, pool = symbol_pool(n, max_order)
    jets = [s for s in pool if s.kind != 0]
    out = GradedForm.zero(n)
    for _ in range(draw(st.integers(1, max_terms))):
        kk = draw(st.integers(0, 2)) if k is None else k
        mm = draw(st.integers(0, n)) if m is None else m
        term = form(draw(scalars(n, 3, 2, max_order=max_order)))
        for lam in sorted(draw(st.permutations(range(n)))[:mm]):
            term = wedge(term, GradedForm.dx(n, lam))
        for _ in range(kk):
            term = wedge(term, GradedForm.theta(draw(st.sampled_from(jets))))
        out = out + term
    return out


# -- acceptance criteria report

ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
