"""Bigraded forms over graded scalars.

A form is stored as ``Σ f_w · w`` with the scalar coefficient written on the
left of a canonical wedge word ``w``.  Word letters are ``(0, λ)`` for
``dx^λ`` and ``(1, s)`` for the contact form ``θ_s``; horizontal letters sort
first.  Letters of even parity anticommute and cannot repeat; odd contact
forms commute with each other and may repeat.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .errors import DimensionError
from .ring import (
    GradedScalar,
    JetSymbol,
    Kind,
    _acc,
    apply_derivation,
    total_derivative,
)

HORIZONTAL = 0
CONTACT = 1


def letter_parity(letter) -> int:
    return int(letter[0] == CONTACT and letter[1].odd)


def word_parity(word) -> int:
    return sum(letter_parity(a) for a in word) % 2


def word_bidegree(word) -> tuple[int, int]:
    k = sum(1 for a in word if a[0] == CONTACT)
    return k, len(word) - k


def canonical_word(seq) -> tuple[int, Optional[tuple]]:
    """Sort letters, returning the Koszul sign (0 if the word vanishes)."""
    seq = tuple(seq)
    sign = 1
    for i in range(len(seq)):
        a = seq[i]
        for j in range(i + 1, len(seq)):
            b = seq[j]
            both_odd = letter_parity(a) and letter_parity(b)
            if a == b:
                if not both_odd:
                    return 0, None
            elif a > b and not both_odd:
                sign = -sign
    return sign, tuple(sorted(seq))


class GradedForm:
    """Finite sum of scalar coefficients times canonical wedge words."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Mapping] = None):
        self.n = n
        self.terms = {w: c for w, c in (terms or {}).items() if c}

    @classmethod
    def _raw(cls, n, terms):
        obj = cls.__new__(cls)
        obj.n = n
        obj.terms = terms
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "GradedForm":
        return cls._raw(n, {})

    @classmethod
    def scalar(cls, f: GradedScalar) -> "GradedForm":
        return cls._raw(f.n, {(): f} if f else {})

    @classmethod
    def const(cls, n: int, c) -> "GradedForm":
        return cls.scalar(GradedScalar.const(n, c))

    @classmethod
    def dx(cls, n: int, lam: int) -> "GradedForm":
        if not 0 <= lam < n:
            raise DimensionError(f"base index {lam} out of range for n={n}")
        return cls._raw(n, {((HORIZONTAL, lam),): GradedScalar.const(n, 1)})

    @classmethod
    def theta(cls, sym: JetSymbol) -> "GradedForm":
        if sym.kind == Kind.COORD:
            raise ValueError("contact forms are defined for jet symbols only")
        return cls._raw(sym.n, {((CONTACT, sym),): GradedScalar.const(sym.n, 1)})

    # -- inspection ---------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, GradedScalar):
            other = GradedForm.scalar(other)
        if isinstance(other, (int, Fraction)):
            other = GradedForm.const(self.n, other)
        if not isinstance(other, GradedForm):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def bidegrees(self) -> set:
        return {word_bidegree(w) for w in self.terms}

    def is_scalar(self) -> bool:
        return all(not w for w in self.terms)

    def as_scalar(self) -> GradedScalar:
        if not self.is_scalar():
            raise ValueError("form has positive degree")
        return self.terms.get((), GradedScalar.zero(self.n))

    def coefficient(self, word) -> GradedScalar:
        return self.terms.get(tuple(word), GradedScalar.zero(self.n))

    def contact_symbols(self) -> set:
        return {a[1] for w in self.terms for a in w if a[0] == CONTACT}

    def jet_symbols(self) -> set:
        out = self.contact_symbols()
        for c in self.terms.values():
            out |= c.jet_symbols()
        return out

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GradedForm):
            if other.n != self.n:
                raise DimensionError(f"base dimensions differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, GradedScalar):
            return GradedForm.scalar(other)
        if isinstance(other, (int, Fraction)):
            return GradedForm.const(self.n, other)
        raise TypeError(f"cannot combine GradedForm with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for w, c in other.terms.items():
            _acc(out, w, c)
        return GradedForm._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedForm._raw(self.n, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "GradedForm":
        return GradedForm._raw(self.n, {w: f.scale(c) for w, f in self.terms.items() if c})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return wedge(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, GradedScalar):
            return wedge(GradedForm.scalar(other), self)
        return NotImplemented

    __xor__ = __mul__

    def __repr__(self):
        from .printer import format_form

        return f"GradedForm({format_form(self)!r})"


def form_sum(items: Iterable[GradedForm], n: int) -> GradedForm:
    out: dict = {}
    for it in items:
        for w, c in it.terms.items():
            _acc(out, w, c)
    return GradedForm._raw(n, out)


def wedge(phi: GradedForm, psi: GradedForm) -> GradedForm:
    """Graded exterior product with sign ``(-1)^{|φ||ψ| + [φ][ψ]}`` on swaps."""
    if phi.n != psi.n:
        raise DimensionError(f"base dimensions differ: {phi.n} vs {psi.n}")
    out: dict = {}
    for u, f in phi.terms.items():
        pu = word_parity(u)
        for v, g in psi.terms.items():
            if u and v:
                sign, w = canonical_word(u + v)
                if not sign:
                    continue
            else:
                sign, w = 1, u + v
            coef = f * g.twist(pu)
            if sign < 0:
                coef = -coef
            _acc(out, w, coef)
    return GradedForm._raw(phi.n, out)


def wedge_all(*forms: GradedForm) -> GradedForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def project_bidegree(phi: GradedForm, k: int, m: int) -> GradedForm:
    """Terms with exactly ``k`` contact and ``m`` horizontal letters."""
    return GradedForm._raw(
        phi.n, {w: c for w, c in phi.terms.items() if word_bidegree(w) == (k, m)}
    )


def contact_part(phi: GradedForm, k: int) -> GradedForm:
    return GradedForm._raw(
        phi.n, {w: c for w, c in phi.terms.items() if word_bidegree(w)[0] == k}
    )


def horizontal_part(phi: GradedForm, m: int) -> GradedForm:
    return GradedForm._raw(
        phi.n, {w: c for w, c in phi.terms.items() if word_bidegree(w)[1] == m}
    )


def horizontal_volume(n: int, lam: Optional[int] = None) -> GradedForm:
    """``ω = dx^1∧…∧dx^n``, or ``ω_λ = ∂_λ⌋ω`` when ``lam`` is given."""
    word = tuple((HORIZONTAL, i) for i in range(n))
    one = GradedScalar.const(n, 1)
    if lam is None:
        return GradedForm._raw(n, {word: one})
    if not 0 <= lam < n:
        raise DimensionError(f"base index {lam} out of range for n={n}")
    rest = word[:lam] + word[lam + 1:]
    return GradedForm._raw(n, {rest: one if lam % 2 == 0 else -one})


def scalar_times(f: GradedScalar, phi: GradedForm) -> GradedForm:
    """``f ∧ φ`` for a 0-form ``f``."""
    return wedge(GradedForm.scalar(f), phi)


def map_coefficients(phi: GradedForm, fn: Callable[[GradedScalar], GradedScalar]) -> GradedForm:
    out: dict = {}
    for w, c in phi.terms.items():
        _acc(out, w, fn(c))
    return GradedForm._raw(phi.n, out)


# ---------------------------------------------------------------------------
# derivations in the (∂_λ, ∂_s) frame


class Derivation:
    """A graded derivation ``ϑ = ϑ^λ ∂_λ + Σ ϑ_s ∂_s`` of homogeneous parity.

    Coefficients sit to the left of the partial derivatives.  ``vertical`` is
    any callable returning the coefficient of ``∂_s`` (None for zero), which
    lets prolonged derivations carry infinitely many coefficients lazily.
    """

    def __init__(
        self,
        n: int,
        parity: int,
        horizontal: Optional[Mapping[int, GradedScalar]] = None,
        vertical: Optional[Callable[[JetSymbol], Optional[GradedScalar]]] = None,
    ):
        self.n = n
        self.parity = int(parity) % 2
        self._horizontal = {k: v for k, v in (horizontal or {}).items() if v}
        self._vertical = vertical or (lambda s: None)
        self._cache: dict = {}

    def horizontal(self, lam: int) -> Optional[GradedScalar]:
        return self._horizontal.get(lam)

    def vertical(self, sym: JetSymbol) -> Optional[GradedScalar]:
        if sym not in self._cache:
            v = self._vertical(sym)
            self._cache[sym] = v if v else None
        return self._cache[sym]

    @property
    def horizontal_coefficients(self) -> dict:
        return dict(self._horizontal)

    def is_vertical(self) -> bool:
        return not self._horizontal

    @classmethod
    def partial(cls, sym: JetSymbol) -> "Derivation":
        one = GradedScalar.const(sym.n, 1)
        return cls(sym.n, int(sym.odd), vertical=lambda s: one if s == sym else None)

    @classmethod
    def coordinate(cls, n: int, lam: int) -> "Derivation":
        return cls(n, 0, horizontal={lam: GradedScalar.const(n, 1)})

    @classmethod
    def total(cls, n: int, lam: int) -> "Derivation":
        return cls(
            n,
            0,
            horizontal={lam: GradedScalar.const(n, 1)},
            vertical=lambda s: GradedScalar.symbol(s.jet(lam)),
        )

    @classmethod
    def from_mapping(cls, n: int, parity: int, horizontal=None, vertical=None) -> "Derivation":
        table = dict(vertical or {})
        return cls(n, parity, horizontal, lambda s: table.get(s))

    def image(self, sym: JetSymbol) -> Optional[GradedScalar]:
        if sym.kind == Kind.COORD:
            return self.horizontal(sym.slot)
        return self.vertical(sym)

    def __call__(self, f: GradedScalar) -> GradedScalar:
        return apply_derivation(f, self.image, self.parity, "left")

    def contract_letter(self, letter) -> Optional[GradedScalar]:
        """``ϑ⌋dx^λ = ϑ^λ`` and ``ϑ⌋θ_s = ϑ_s - ϑ^λ s_λ``."""
        kind, what = letter
        if kind == HORIZONTAL:
            return self.horizontal(what)
        val = self.vertical(what) or GradedScalar.zero(self.n)
        for lam, coef in self._horizontal.items():
            val = val - coef * GradedScalar.symbol(what.jet(lam))
        return val or None


def interior_product(theta: Derivation, phi: GradedForm) -> GradedForm:
    """Graded contraction obeying
    ``u⌋(φ∧φ') = (u⌋φ)∧φ' + (-1)^{|φ|+[φ][u]} φ∧(u⌋φ')``."""
    out: dict = {}
    p = theta.parity
    for word, f in phi.terms.items():
        f_tw = f.twist(p)
        prefix_par = 0
        for i, letter in enumerate(word):
            g = theta.contract_letter(letter)
            if g is not None:
                sign = -1 if (i + p * prefix_par) % 2 else 1
                coef = f_tw * g.twist(prefix_par)
                if sign < 0:
                    coef = -coef
                _acc(out, word[:i] + word[i + 1:], coef)
            prefix_par ^= letter_parity(letter)
    return GradedForm._raw(phi.n, out)


def total_derivative_form(phi: GradedForm, lam: int) -> GradedForm:
    """``d_λ`` extended to forms: ``θ_s ↦ θ_{s_λ}``, ``dx ↦ 0``."""
    out: dict = {}
    for word, f in phi.terms.items():
        df = total_derivative(f, lam)
        if df:
            _acc(out, word, df)
        for i, letter in enumerate(word):
            if letter[0] != CONTACT:
                continue
            new = word[:i] + ((CONTACT, letter[1].jet(lam)),) + word[i + 1:]
            sign, w = canonical_word(new)
            if sign:
                _acc(out, w, f if sign > 0 else -f)
    return GradedForm._raw(phi.n, out)


def total_derivative_form_multi(phi: GradedForm, index) -> GradedForm:
    from .ring import mi_sequence

    for lam in mi_sequence(index):
        if not phi:
            break
        phi = total_derivative_form(phi, lam)
    return phi
