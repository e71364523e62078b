"""Text rendering of scalars and forms in the model expression syntax.

Output is deterministic: terms are sorted by degree and then by the
canonical monomial order, so identical values always print identically.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .ring import GradedScalar, JetSymbol, Kind, mi_sequence, mono_degree, unauxiliary


def default_coordinates(n: int) -> tuple[str, ...]:
    if n == 1:
        return ("x",)
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i + 1}" for i in range(n))


def format_symbol(sym: JetSymbol, coords: Optional[Sequence[str]] = None) -> str:
    coords = coords or default_coordinates(sym.n)
    if sym.kind == Kind.COORD:
        return coords[sym.slot]
    if sym.kind == Kind.ANTIFIELD:
        head = f"bar({sym.name})"
    elif sym.kind == Kind.AUX:
        head = f"aux({format_symbol(unauxiliary(sym.base), coords)})"
    else:
        head = sym.name
    lams = mi_sequence(sym.index)
    if not lams:
        return head
    return "d(" + ",".join([head] + [coords[l] for l in lams]) + ")"


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_mono(mono, coords) -> str:
    parts = []
    for s, e in mono[0]:
        t = format_symbol(s, coords)
        parts.append(t if e == 1 else f"{t}^{e}")
    parts.extend(format_symbol(s, coords) for s in mono[1])
    return "*".join(parts)


def _sorted_terms(f: GradedScalar):
    return sorted(f.terms.items(), key=lambda kv: (mono_degree(kv[0], True), kv[0]))


def format_scalar(f: GradedScalar, coords: Optional[Sequence[str]] = None) -> str:
    coords = coords or default_coordinates(f.n)
    if not f.terms:
        return "0"
    out = []
    for i, (mono, c) in enumerate(_sorted_terms(f)):
        neg = c < 0
        a = -c if neg else c
        body = _format_mono(mono, coords)
        if not body:
            text = _format_coeff(a)
        elif a == 1:
            text = body
        else:
            text = f"{_format_coeff(a)}*{body}"
        if i == 0:
            out.append(("-" if neg else "") + text)
        else:
            out.append((" - " if neg else " + ") + text)
    return "".join(out)


def format_one_form(elem, coords) -> str:
    kind, what = elem
    if kind == 0:
        return f"dx({coords[what]})"
    sym_text = format_symbol(what.base, coords)
    lams = [coords[l] for l in mi_sequence(what.index)]
    return "theta(" + ",".join([sym_text] + lams) + ")"


def format_form(phi, coords: Optional[Sequence[str]] = None) -> str:
    coords = coords or default_coordinates(phi.n)
    if not phi.terms:
        return "0"
    pieces = []
    for word in sorted(phi.terms, key=lambda w: (len(w), w)):
        coef = phi.terms[word]
        wtext = " ^ ".join(format_one_form(e, coords) for e in word)
        ctext = format_scalar(coef, coords)
        if not word:
            pieces.append(f"({ctext})" if len(coef.terms) > 1 else ctext)
        elif ctext == "1":
            pieces.append(wtext)
        elif ctext == "-1":
            pieces.append(f"-{wtext}")
        elif len(coef.terms) == 1:
            pieces.append(f"{ctext}*{wtext}")
        else:
            pieces.append(f"({ctext})*{wtext}")
    text = pieces[0]
    for p in pieces[1:]:
        text += " - " + p[1:] if p.startswith("-") else " + " + p
    return text


def pretty_print(value, coords: Optional[Sequence[str]] = None) -> str:
    """Render a scalar, form, or number in parseable text."""
    from .forms import GradedForm

    if isinstance(value, GradedForm):
        return format_form(value, coords)
    if isinstance(value, GradedScalar):
        return format_scalar(value, coords)
    if isinstance(value, (int, Fraction)):
        return _format_coeff(Fraction(value))
    raise TypeError(f"cannot print {type(value).__name__}")
