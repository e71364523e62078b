"""Exact graded-commutative polynomials in jet symbols.

A :class:`GradedScalar` is a finite sum of monomials with rational
coefficients.  A monomial is a pair ``(even, odd)`` where ``even`` is a sorted
tuple of ``(symbol, exponent)`` pairs and ``odd`` is a strictly increasing
tuple of odd symbols.  Reordering signs are absorbed into the coefficient, so
two scalars are equal exactly when their term maps are equal.
"""
from __future__ import annotations

import bisect
import math
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Union

from .errors import DimensionError, UnknownSymbolError, DegreeError

Number = Union[int, Fraction]


class Parity(IntEnum):
    EVEN = 0
    ODD = 1

    def __add__(self, other):
        return Parity((int(self) + int(other)) % 2)

    __radd__ = __add__


class Kind(IntEnum):
    """Symbol classes; the integer value is the primary sort key."""

    COORD = 0
    FIELD = 1
    AUX = 2
    ANTIFIELD = 3
    GHOST = 4


# ---------------------------------------------------------------------------
# multi-indices: tuples of occurrence counts, one slot per base coordinate


def mi_zero(n: int) -> tuple[int, ...]:
    return (0,) * n


def mi_unit(n: int, lam: int) -> tuple[int, ...]:
    if not 0 <= lam < n:
        raise DimensionError(f"base index {lam} out of range for n={n}")
    return tuple(1 if i == lam else 0 for i in range(n))


def mi_add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: tuple[int, ...], b: tuple[int, ...]) -> Optional[tuple[int, ...]]:
    """``a - b`` as multisets, or None when ``b`` is not contained in ``a``."""
    out = tuple(x - y for x, y in zip(a, b))
    return out if min(out, default=0) >= 0 else None


def mi_order(a: tuple[int, ...]) -> int:
    return sum(a)


def mi_factorial(a: tuple[int, ...]) -> int:
    return math.prod(math.factorial(x) for x in a)


def mi_submultisets(a: tuple[int, ...]):
    """All sub-multisets of ``a`` (including zero and ``a`` itself)."""
    ranges = [range(x + 1) for x in a]

    def rec(i, acc):
        if i == len(ranges):
            yield tuple(acc)
            return
        for v in ranges[i]:
            acc.append(v)
            yield from rec(i + 1, acc)
            acc.pop()

    yield from rec(0, [])


def multi_indices(n: int, max_order: int):
    """Every multi-index of order ``0..max_order`` in a stable order."""
    out = []
    for order in range(max_order + 1):
        for combo in _compositions(order, n):
            out.append(combo)
    return out


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def mi_sequence(a: tuple[int, ...]) -> tuple[int, ...]:
    """The sorted list of base indices making up ``a``."""
    out = []
    for lam, count in enumerate(a):
        out.extend([lam] * count)
    return tuple(out)


# ---------------------------------------------------------------------------
# symbols


class JetSymbol(NamedTuple):
    """A jet coordinate ``s_Λ`` of a field, antifield, ghost or auxiliary variable.

    Base coordinates ``x^λ`` are also represented as symbols of kind
    ``COORD``; their ``index`` is the unit count vector of their slot.
    """

    kind: int
    stage: int
    name: str
    index: tuple[int, ...]
    odd: bool

    @property
    def parity(self) -> Parity:
        return Parity.ODD if self.odd else Parity.EVEN

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def is_coordinate(self) -> bool:
        return self.kind == Kind.COORD

    @property
    def slot(self) -> int:
        """Base slot of a coordinate symbol."""
        return self.index.index(1)

    @property
    def order(self) -> int:
        return 0 if self.kind == Kind.COORD else sum(self.index)

    @property
    def base(self) -> "JetSymbol":
        if self.kind == Kind.COORD:
            return self
        return self._replace(index=(0,) * len(self.index))

    def jet(self, *lams: int) -> "JetSymbol":
        if self.kind == Kind.COORD:
            raise UnknownSymbolError(f"coordinate {self.name} has no jets")
        idx = list(self.index)
        for lam in lams:
            if not 0 <= lam < len(idx):
                raise DimensionError(f"base index {lam} out of range")
            idx[lam] += 1
        return self._replace(index=tuple(idx))

    def with_index(self, index: tuple[int, ...]) -> "JetSymbol":
        return self._replace(index=tuple(index))

    @property
    def antifield_number(self) -> int:
        if self.kind == Kind.ANTIFIELD:
            return self.stage + 2
        if self.kind == Kind.GHOST:
            return -(self.stage + 1)
        return 0

    @property
    def ghost_number(self) -> int:
        return self.stage + 1 if self.kind == Kind.GHOST else 0


def coordinate(slot: int, n: int) -> JetSymbol:
    """The base coordinate ``x^slot``; display names live in the printer."""
    if not 0 <= slot < n:
        raise DimensionError(f"base index {slot} out of range for n={n}")
    return JetSymbol(Kind.COORD, 0, "", mi_unit(n, slot), False)


def field(name: str, n: int, odd: bool = False) -> JetSymbol:
    return JetSymbol(Kind.FIELD, 0, name, mi_zero(n), odd)


def antifield(name: str, n: int, odd: bool, stage: int = -1) -> JetSymbol:
    return JetSymbol(Kind.ANTIFIELD, stage, name, mi_zero(n), odd)


def ghost(name: str, n: int, odd: bool, stage: int = 0) -> JetSymbol:
    return JetSymbol(Kind.GHOST, stage, name, mi_zero(n), odd)


def auxiliary(sym: JetSymbol) -> JetSymbol:
    """The barred companion of ``sym``: same parity, kind AUX.

    The original kind and stage are kept in ``stage`` so the map inverts.
    """
    if sym.kind in (Kind.COORD, Kind.AUX):
        raise UnknownSymbolError(f"cannot bar symbol {sym.name!r}")
    return sym._replace(kind=Kind.AUX, stage=(int(sym.kind), sym.stage))


def unauxiliary(sym: JetSymbol) -> JetSymbol:
    if sym.kind != Kind.AUX:
        raise UnknownSymbolError(f"{sym.name!r} is not a barred symbol")
    kind, stage = sym.stage
    return sym._replace(kind=Kind(kind), stage=stage)


# ---------------------------------------------------------------------------
# monomial arithmetic

_ONE_MONO = ((), ())


def _merge_odd(a: tuple, b: tuple):
    """Concatenate two sorted odd words; return (sign, word) or (0, None)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    inversions = 0
    la = len(a)
    for x in b:
        pos = bisect.bisect_left(a, x)
        if pos < la and a[pos] == x:
            return 0, None
        inversions += la - pos
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


def _sort_odd(seq) -> tuple:
    seq = tuple(seq)
    inversions = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] == seq[j]:
                return 0, None
            if seq[i] > seq[j]:
                inversions += 1
    return (-1 if inversions & 1 else 1), tuple(sorted(seq))


def _merge_even(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        d[s] = d.get(s, 0) + e
    return tuple(sorted(d.items()))


def _mono_mul(m1, m2):
    sign, odd = _merge_odd(m1[1], m2[1])
    if not sign:
        return 0, None
    return sign, (_merge_even(m1[0], m2[0]), odd)


def mono_symbols(mono) -> list:
    return [s for s, _ in mono[0]] + list(mono[1])


def mono_degree(mono, include_coordinates: bool = False) -> int:
    deg = sum(e for s, e in mono[0] if include_coordinates or s.kind != Kind.COORD)
    return deg + len(mono[1])


def _acc(out: dict, key, value):
    v = out.get(key)
    v = value if v is None else v + value
    if v:
        out[key] = v
    elif key in out:
        del out[key]


class GradedScalar:
    """Exact polynomial in jet symbols with graded-commutative product."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Optional[Mapping] = None):
        self.n = n
        clean = {}
        if terms:
            for k, v in terms.items():
                if v:
                    clean[k] = Fraction(v)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "GradedScalar":
        obj = cls.__new__(cls)
        obj.n = n
        obj.terms = terms
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "GradedScalar":
        return cls._raw(n, {})

    @classmethod
    def const(cls, n: int, value: Number) -> "GradedScalar":
        return cls._raw(n, {_ONE_MONO: Fraction(value)} if value else {})

    @classmethod
    def symbol(cls, sym: JetSymbol, coeff: Number = 1) -> "GradedScalar":
        if not isinstance(sym, JetSymbol):
            raise UnknownSymbolError(f"not a jet symbol: {sym!r}")
        mono = ((), (sym,)) if sym.odd else (((sym, 1),), ())
        return cls._raw(sym.n, {mono: Fraction(coeff)} if coeff else {})

    # -- inspection ---------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GradedScalar.const(self.n, other)
        if not isinstance(other, GradedScalar):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def symbols(self) -> set:
        out = set()
        for mono in self.terms:
            out.update(mono_symbols(mono))
        return out

    def jet_symbols(self) -> set:
        return {s for s in self.symbols() if s.kind != Kind.COORD}

    def parities(self) -> set:
        return {len(m[1]) % 2 for m in self.terms}

    @property
    def parity(self) -> Parity:
        """Parity of a homogeneous scalar; zero counts as even."""
        ps = self.parities()
        if len(ps) > 1:
            raise ValueError("scalar is not parity-homogeneous")
        return Parity(ps.pop()) if ps else Parity.EVEN

    def is_homogeneous(self) -> bool:
        return len(self.parities()) <= 1

    def constant_term(self) -> Fraction:
        return self.terms.get(_ONE_MONO, Fraction(0))

    def max_order(self) -> int:
        return max((s.order for s in self.jet_symbols()), default=0)

    def split_parity(self) -> tuple["GradedScalar", "GradedScalar"]:
        even, odd = {}, {}
        for m, c in self.terms.items():
            (odd if len(m[1]) % 2 else even)[m] = c
        return GradedScalar._raw(self.n, even), GradedScalar._raw(self.n, odd)

    def twist(self, flag: int = 1) -> "GradedScalar":
        """Negate odd monomials when ``flag`` is odd: ``(-1)^{[f]} f``."""
        if not flag % 2:
            return self
        return GradedScalar._raw(
            self.n, {m: (-c if len(m[1]) % 2 else c) for m, c in self.terms.items()}
        )

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "GradedScalar":
        if isinstance(other, GradedScalar):
            if other.n != self.n:
                raise DimensionError(f"base dimensions differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return GradedScalar.const(self.n, other)
        raise TypeError(f"cannot combine GradedScalar with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return GradedScalar._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedScalar._raw(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Number) -> "GradedScalar":
        c = Fraction(c)
        if not c:
            return GradedScalar.zero(self.n)
        return GradedScalar._raw(self.n, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GradedScalar):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = GradedScalar.const(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self):
        from .printer import format_scalar

        return f"GradedScalar({format_scalar(self)!r})"


def mul(a: GradedScalar, b: GradedScalar) -> GradedScalar:
    """Graded-commutative product of two scalars."""
    if a.n != b.n:
        raise DimensionError(f"base dimensions differ: {a.n} vs {b.n}")
    out: dict = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            sign, m = _mono_mul(m1, m2)
            if sign:
                _acc(out, m, c1 * c2 * sign)
    return GradedScalar._raw(a.n, out)


def scalar_sum(items: Iterable[GradedScalar], n: int) -> GradedScalar:
    out: dict = {}
    for it in items:
        for k, v in it.terms.items():
            _acc(out, k, v)
    return GradedScalar._raw(n, out)


# ---------------------------------------------------------------------------
# derivations


def apply_derivation(
    f: GradedScalar,
    image: Callable[[JetSymbol], Optional[GradedScalar]],
    parity: int = 0,
    side: str = "left",
) -> GradedScalar:
    """Apply the derivation determined by its values on generators.

    ``image(s)`` returns ``D(s)`` or None for zero.  A left derivation of
    parity p obeys ``D(ab) = D(a)b + (-1)^{p[a]} a D(b)``; a right one obeys
    ``D(ab) = a D(b) + (-1)^{p[b]} D(a) b``.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    cache: dict = {}

    def img(s):
        if s not in cache:
            g = image(s)
            cache[s] = g if g else None
        return cache[s]

    out: dict = {}
    right = side == "right"
    for (even, odd), c in f.terms.items():
        nodd = len(odd)
        for i, (s, e) in enumerate(even):
            g = img(s)
            if g is None:
                continue
            rest = even[:i] + ((s, e - 1),) + even[i + 1:] if e > 1 else even[:i] + even[i + 1:]
            coef = c * e
            if right and parity and nodd % 2:
                coef = -coef
            for (ge, go), gc in g.terms.items():
                sign, w = _merge_odd(go, odd)
                if sign:
                    _acc(out, (_merge_even(rest, ge), w), coef * gc * sign)
        for i, s in enumerate(odd):
            g = img(s)
            if g is None:
                continue
            k = (nodd - 1 - i) if right else i
            coef = -c if (parity and k % 2) else c
            pre, post = odd[:i], odd[i + 1:]
            for (ge, go), gc in g.terms.items():
                s1, w1 = _merge_odd(pre, go)
                if not s1:
                    continue
                s2, w2 = _merge_odd(w1, post)
                if s2:
                    _acc(out, (_merge_even(even, ge), w2), coef * gc * s1 * s2)
    return GradedScalar._raw(f.n, out)


def partial(f: GradedScalar, sym: JetSymbol, side: str = "left") -> GradedScalar:
    """Graded partial derivative with respect to ``sym`` from the left or right."""
    if not isinstance(sym, JetSymbol):
        raise UnknownSymbolError(f"not a declared jet symbol: {sym!r}")
    if sym.n != f.n:
        raise DimensionError(f"symbol {sym.name} lives in dimension {sym.n}, scalar in {f.n}")
    one = GradedScalar.const(f.n, 1)
    return apply_derivation(f, lambda s: one if s == sym else None, int(sym.odd), side)


def total_derivative(f: GradedScalar, lam: int) -> GradedScalar:
    """``d_λ f``: the formal derivative along base coordinate ``λ`` (0-based)."""
    if not 0 <= lam < f.n:
        raise DimensionError(f"base index {lam} out of range for n={f.n}")
    one = GradedScalar.const(f.n, 1)

    def image(s):
        if s.kind == Kind.COORD:
            return one if s.index[lam] else None
        return GradedScalar.symbol(s.jet(lam))

    return apply_derivation(f, image, 0)


def total_derivative_multi(f: GradedScalar, index: tuple[int, ...]) -> GradedScalar:
    """``d_Λ f`` for a multi-index of counts."""
    for lam in mi_sequence(index):
        if not f:
            break
        f = total_derivative(f, lam)
    return f


class DerivativeCache:
    """Memoised ``d_Λ`` of a single scalar, built by extending shorter indices."""

    def __init__(self, f: GradedScalar):
        self.n = f.n
        self._cache = {mi_zero(f.n): f}

    def __call__(self, index: tuple[int, ...]) -> GradedScalar:
        index = tuple(index)
        got = self._cache.get(index)
        if got is not None:
            return got
        lam = max(i for i, c in enumerate(index) if c)
        prev = list(index)
        prev[lam] -= 1
        val = total_derivative(self(tuple(prev)), lam)
        self._cache[index] = val
        return val


# ---------------------------------------------------------------------------
# integration by parts


def eta_transform(
    f: Mapping[tuple[int, ...], GradedScalar],
    n: int,
    max_order: Optional[int] = None,
    convention: str = "multiset",
) -> dict:
    """The integration-by-parts involution on coefficient tuples.

    ``η(f)^Λ = Σ_Σ (-1)^{|Σ+Λ|} C(Σ,Λ) d_Σ f^{Σ+Λ}``.  With the default
    ``"multiset"`` convention ``C = Π_μ binom(Σ_μ+Λ_μ, Λ_μ)``; ``"length"``
    uses ``|Σ+Λ|!/(|Σ|!|Λ|!)``, which is only an involution for ``n = 1``.
    Entries with ``|Σ+Λ| > max_order`` are ignored.
    """
    if convention not in ("multiset", "length"):
        raise ValueError(f"unknown convention {convention!r}")
    out: dict = {}
    for top, coeff in f.items():
        top = tuple(top)
        if len(top) != n:
            raise DimensionError(f"multi-index {top} has wrong length for n={n}")
        if not coeff or (max_order is not None and sum(top) > max_order):
            continue
        derivs = DerivativeCache(coeff)
        sign = -1 if sum(top) % 2 else 1
        for lam in mi_submultisets(top):
            sig = mi_sub(top, lam)
            if convention == "multiset":
                c = math.prod(math.comb(t, l) for t, l in zip(top, lam))
            else:
                c = math.comb(sum(top), sum(lam))
            term = derivs(sig).scale(sign * c)
            if lam in out:
                out[lam] = out[lam] + term
            else:
                out[lam] = term
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# degree weighting


def jet_degree_components(f: GradedScalar) -> dict[int, GradedScalar]:
    """Split ``f`` by total polynomial degree in non-coordinate symbols."""
    parts: dict[int, dict] = {}
    for m, c in f.terms.items():
        parts.setdefault(mono_degree(m), {})[m] = c
    return {k: GradedScalar._raw(f.n, v) for k, v in sorted(parts.items())}


def substitute_scale(f: GradedScalar, weight: Callable[[int], Number]) -> GradedScalar:
    """Multiply every monomial of jet degree k by ``weight(k)``."""
    out = {}
    for m, c in f.terms.items():
        k = mono_degree(m)
        try:
            w = Fraction(weight(k))
        except ZeroDivisionError as exc:
            raise DegreeError(f"weight undefined at jet degree {k}") from exc
        if w:
            out[m] = c * w
    return GradedScalar._raw(f.n, out)


def inverse_degree(k: int) -> Fraction:
    """The weight ``∫_0^1 λ^{k-1} dλ = 1/k``."""
    if k == 0:
        raise ZeroDivisionError("1/k at k = 0")
    return Fraction(1, k)
