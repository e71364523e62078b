"""Seeded generators of random scalars, forms, Lagrangians and vector fields.

Used by ``selftest`` and by the property tests.  All randomness flows through
one ``random.Random`` instance, so a seed fixes every draw.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .forms import GradedForm, horizontal_volume, wedge
from .ring import GradedScalar, JetSymbol, coordinate, field, multi_indices
from .variational import GradedDerivation, Lagrangian, d_horizontal

EVEN_NAMES = ("u", "v")
ODD_NAMES = ("c", "b")


@dataclass
class Shape:
    """Size limits for generated values."""

    n: int = 2
    n_even: int = 1
    n_odd: int = 1
    max_order: int = 2
    degree: int = 3
    terms: int = 3
    coordinates: bool = True


class RandomGenerator:
    def __init__(self, seed: Optional[int] = 0):
        self.rng = random.Random(seed)

    # -- building blocks

    def shape(self, max_n: int = 3, max_order: int = 3, degree: int = 3) -> Shape:
        r = self.rng
        return Shape(
            n=r.randint(1, max_n),
            n_even=r.randint(0, 2),
            n_odd=r.randint(0, 2),
            max_order=r.randint(0, max_order),
            degree=degree,
        )

    def fields(self, shape: Shape) -> list[JetSymbol]:
        out = [field(nm, shape.n) for nm in EVEN_NAMES[: shape.n_even]]
        out += [field(nm, shape.n, True) for nm in ODD_NAMES[: shape.n_odd]]
        if not out:
            out = [field(EVEN_NAMES[0], shape.n)]
        return out

    def jets(self, shape: Shape, fields: Sequence[JetSymbol]) -> list[JetSymbol]:
        out = []
        for A in fields:
            for idx in multi_indices(shape.n, shape.max_order):
                out.append(A.with_index(idx))
        return out

    def _pool(self, shape: Shape, fields) -> list[JetSymbol]:
        pool = self.jets(shape, fields)
        if shape.coordinates:
            pool += [coordinate(i, shape.n) for i in range(shape.n)]
        return pool

    def scalar(self, shape: Shape, fields=None, parity: Optional[int] = None,
               pool: Optional[Sequence[JetSymbol]] = None) -> GradedScalar:
        """A polynomial with at most ``shape.terms`` monomials of degree ``<= shape.degree``."""
        r = self.rng
        fields = fields if fields is not None else self.fields(shape)
        pool = list(pool) if pool is not None else self._pool(shape, fields)
        f = GradedScalar.zero(shape.n)
        for _ in range(shape.terms):
            t = GradedScalar.const(shape.n, r.randint(-3, 3))
            for _ in range(r.randint(0, shape.degree)):
                t = t * GradedScalar.symbol(r.choice(pool))
            f = f + t
        if parity is not None:
            f = f.split_parity()[parity]
        return f

    def contact_letter(self, shape: Shape, fields) -> GradedForm:
        return GradedForm.theta(self.rng.choice(self.jets(shape, fields)))

    def form(self, shape: Shape, fields=None, k: Optional[int] = None,
             m: Optional[int] = None) -> GradedForm:
        """A random form; bidegree ``(k, m)`` if given, else a mix of small bidegrees."""
        r = self.rng
        fields = fields if fields is not None else self.fields(shape)
        n = shape.n
        out = GradedForm.zero(n)
        for _ in range(r.randint(1, 3)):
            kk = k if k is not None else r.randint(0, 2)
            mm = m if m is not None else r.randint(0, n)
            word = GradedForm.scalar(self.scalar(shape, fields))
            for lam in sorted(r.sample(range(n), mm)):
                word = wedge(word, GradedForm.dx(n, lam))
            for _ in range(kk):
                word = wedge(word, self.contact_letter(shape, fields))
            out = out + word
        return out

    def lagrangian(self, shape: Shape, fields=None) -> Lagrangian:
        fields = fields if fields is not None else self.fields(shape)
        dens = self.scalar(shape, fields, parity=0)
        return Lagrangian(dens, tuple(fields))

    def derivation(self, shape: Shape, fields=None, parity: Optional[int] = None,
                   vertical_only: bool = False) -> GradedDerivation:
        """A generalized vector field; horizontal parts only when even."""
        r = self.rng
        fields = fields if fields is not None else self.fields(shape)
        parity = r.randint(0, 1) if parity is None else parity
        small = Shape(shape.n, shape.n_even, shape.n_odd, shape.max_order, 2, 2, shape.coordinates)
        horizontal = {}
        if parity == 0 and not vertical_only:
            for lam in range(shape.n):
                if r.random() < 0.6:
                    horizontal[lam] = self.scalar(small, fields, parity=0)
        vertical = {A: self.scalar(small, fields, parity=(parity + A.odd) % 2) for A in fields}
        return GradedDerivation(shape.n, horizontal, vertical, parity=parity)

    def eta_tuple(self, shape: Shape, fields=None, max_index: int = 3) -> dict:
        """A coefficient tuple ``{Λ: f^Λ}`` with ``|Λ| <= max_index``."""
        fields = fields if fields is not None else self.fields(shape)
        idxs = list(multi_indices(shape.n, max_index))
        chosen = self.rng.sample(idxs, min(len(idxs), self.rng.randint(1, 3)))
        out = {}
        for idx in chosen:
            f = self.scalar(shape, fields, parity=0)
            if f:
                out[idx] = f
        return out

    # -- d_H-exact inputs for the homotopy operators

    def _basis(self, n: int, m: int):
        for combo in itertools.combinations(range(n), m):
            w = GradedForm.const(n, 1)
            for lam in combo:
                w = wedge(w, GradedForm.dx(n, lam))
            yield w

    def potential(self, shape: Shape, fields, k: int, m: int) -> GradedForm:
        """A random ``(k, m)``-form built on the standard basis of ``m``-forms."""
        n = shape.n
        out = GradedForm.zero(n)
        for w in self._basis(n, m):
            term = wedge(GradedForm.scalar(self.scalar(shape, fields)), w)
            for _ in range(k):
                term = wedge(term, self.contact_letter(shape, fields))
            out = out + term
        return out

    def exact(self, shape: Shape, fields, k: int, m: int) -> GradedForm:
        """``d_H`` of a random ``(k, m-1)``-form, so a ``(k, m)``-form."""
        return d_horizontal(self.potential(shape, fields, k, m - 1))


def exact_density(gen: RandomGenerator, shape: Shape, fields) -> GradedForm:
    """A variationally trivial density ``d_H(Σ J^μ ω_μ)``."""
    n = shape.n
    xi = GradedForm.zero(n)
    for mu in range(n):
        xi = xi + wedge(GradedForm.scalar(gen.scalar(shape, fields)), horizontal_volume(n, mu))
    return d_horizontal(xi)
