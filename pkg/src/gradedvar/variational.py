"""Bicomplex differentials, Euler–Lagrange operators and symmetries."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Optional

from .errors import BidegreeError, ParityError
from .forms import (
    CONTACT,
    HORIZONTAL,
    Derivation,
    GradedForm,
    canonical_word,
    contact_part,
    horizontal_volume,
    interior_product,
    project_bidegree,
    total_derivative_form,
    total_derivative_form_multi,
    wedge,
    word_bidegree,
)
from .ring import (
    DerivativeCache,
    GradedScalar,
    JetSymbol,
    Kind,
    _acc,
    mi_add,
    mi_order,
    mi_unit,
    multi_indices,
    partial,
    total_derivative,
)


# ---------------------------------------------------------------------------
# differentials


def d_vertical(phi: GradedForm) -> GradedForm:
    """``d_V φ = θ_s ∧ ∂_s φ`` summed over the jet symbols of the coefficients."""
    out: dict = {}
    for word, f in phi.terms.items():
        for s in sorted(f.jet_symbols()):
            g = partial(f, s)
            if not g:
                continue
            sign, w = canonical_word(((CONTACT, s),) + word)
            if not sign:
                continue
            coef = g.twist(int(s.odd))
            _acc(out, w, coef if sign > 0 else -coef)
    return GradedForm._raw(phi.n, out)


def d_horizontal(phi: GradedForm) -> GradedForm:
    """``d_H φ = dx^λ ∧ d_λ φ``."""
    out = GradedForm.zero(phi.n)
    for lam in range(phi.n):
        out = out + wedge(GradedForm.dx(phi.n, lam), total_derivative_form(phi, lam))
    return out


def d(phi: GradedForm) -> GradedForm:
    return d_horizontal(phi) + d_vertical(phi)


def exterior_derivative(phi: GradedForm) -> GradedForm:
    """The exterior differential computed from coordinate differentials.

    Uses ``ds = θ_s + s_λ dx^λ`` and ``dθ_s = -θ_{s_λ} ∧ dx^λ`` with plain
    partial derivatives, independently of ``d_H``/``d_V``.
    """
    n = phi.n
    out = GradedForm.zero(n)
    for word, f in phi.terms.items():
        w = GradedForm._raw(n, {word: GradedScalar.const(n, 1)})
        # d f ∧ w
        for s in sorted(f.symbols()):
            g = partial(f, s)
            if not g:
                continue
            if s.kind == Kind.COORD:
                ds = GradedForm.dx(n, s.slot)
            else:
                ds = GradedForm.theta(s)
                for lam in range(n):
                    ds = ds + wedge(GradedForm.scalar(GradedScalar.symbol(s.jet(lam))), GradedForm.dx(n, lam))
            out = out + wedge(wedge(ds, GradedForm.scalar(g)), w)
        # f ∧ d w, Leibniz over letters
        fw = GradedForm.scalar(f)
        for i, letter in enumerate(word):
            if letter[0] == HORIZONTAL:
                continue
            s = letter[1]
            dtheta = GradedForm.zero(n)
            for lam in range(n):
                dtheta = dtheta - wedge(GradedForm.theta(s.jet(lam)), GradedForm.dx(n, lam))
            pre = GradedForm._raw(n, {word[:i]: GradedScalar.const(n, 1)})
            post = GradedForm._raw(n, {word[i + 1:]: GradedScalar.const(n, 1)})
            term = wedge(wedge(pre, dtheta), post)
            out = out + (wedge(fw, term) if i % 2 == 0 else -wedge(fw, term))
    return out


# ---------------------------------------------------------------------------
# projector and Euler–Lagrange operator


def _check_top_horizontal(phi: GradedForm, allow_zero_contact=False):
    for w in phi.terms:
        k, m = word_bidegree(w)
        if m != phi.n or (k == 0 and not allow_zero_contact):
            raise BidegreeError(f"expected contact degree > 0 and horizontal degree {phi.n}, got ({k},{m})")


def rho_bar(phi: GradedForm) -> GradedForm:
    """``Σ (-1)^{|Λ|} θ^A ∧ d_Λ(∂^Λ_A ⌋ φ)``."""
    n = phi.n
    out = GradedForm.zero(n)
    for s in sorted(phi.contact_symbols()):
        inner = interior_product(Derivation.partial(s), phi)
        inner = total_derivative_form_multi(inner, s.index)
        if not inner:
            continue
        term = wedge(GradedForm.theta(s.base), inner)
        out = out - term if mi_order(s.index) % 2 else out + term
    return out


def rho_projector(phi: GradedForm) -> GradedForm:
    """The graded projection ``ρ = Σ_k (1/k) ρ̄ ∘ h_k ∘ h^n`` on ``(k>0, n)``-forms."""
    _check_top_horizontal(phi)
    out = GradedForm.zero(phi.n)
    for k in sorted({word_bidegree(w)[0] for w in phi.terms}):
        out = out + rho_bar(contact_part(phi, k)).scale(Fraction(1, k))
    return out


def variational_derivative(f: GradedScalar, sym: JetSymbol, side: str = "left") -> GradedScalar:
    """``Σ_Λ (-1)^{|Λ|} d_Λ(∂^Λ_s f)`` for the base symbol ``sym``."""
    base = sym.base
    out = GradedScalar.zero(f.n)
    for s in f.jet_symbols():
        if s.base != base:
            continue
        g = partial(f, s, side)
        for lam_count, lam in enumerate(_sequence(s.index)):
            g = total_derivative(g, lam)
        out = out - g if mi_order(s.index) % 2 else out + g
    return out


def _sequence(index):
    from .ring import mi_sequence

    return mi_sequence(index)


def delta(phi: GradedForm) -> GradedForm:
    """The variational operator ``δ = ρ ∘ d`` on ``(k, n)``-forms."""
    for w in phi.terms:
        if word_bidegree(w)[1] != phi.n:
            raise BidegreeError("δ acts on forms of horizontal degree n")
    return rho_projector(d_vertical(phi)) if phi else GradedForm.zero(phi.n)


@dataclass(frozen=True, eq=False)
class Lagrangian:
    """An even density ``L = 𝓛 ω`` together with its dependent variables."""

    density: GradedScalar
    fields: tuple = ()

    def __post_init__(self):
        if not self.density.is_homogeneous() or self.density.parity:
            raise ParityError("Lagrangians must be even")
        declared = tuple(sorted({s.base for s in self.density.jet_symbols()} | set(self.fields)))
        object.__setattr__(self, "fields", tuple(s.base for s in declared))

    @property
    def n(self) -> int:
        return self.density.n

    @property
    def form(self) -> GradedForm:
        return wedge(GradedForm.scalar(self.density), horizontal_volume(self.n))

    @property
    def max_order(self) -> int:
        return self.density.max_order()


@dataclass(frozen=True, eq=False)
class EulerLagrangeResult:
    components: dict
    form: GradedForm

    def __getitem__(self, sym: JetSymbol) -> GradedScalar:
        return self.components[sym.base]


def euler_lagrange(L: Lagrangian) -> EulerLagrangeResult:
    """Euler–Lagrange expressions ``E_A`` and the form ``δL = ρ(dL)``."""
    comps = {A: variational_derivative(L.density, A) for A in L.fields}
    return EulerLagrangeResult(comps, delta(L.form))


def euler_lagrange_form(L: Lagrangian, components: Mapping) -> GradedForm:
    """``Σ θ^A ∧ E_A ω`` assembled from components."""
    omega = horizontal_volume(L.n)
    out = GradedForm.zero(L.n)
    for A, E in components.items():
        out = out + wedge(wedge(GradedForm.theta(A), GradedForm.scalar(E)), omega)
    return out


def lepage_equivalent(L: Lagrangian) -> GradedForm:
    """``Ξ_L = L + Σ θ^A_Σ ∧ F^{λΣ}_A ω_λ``.

    The coefficients come from the downward recursion
    ``G^Λ = ∂^Λ𝓛 - Σ_λ d_λ((Λ_λ+1)/(|Λ|+1) G^{λ+Λ})`` and
    ``F^{λ,Σ} = (Σ_λ+1)/(|Σ|+1) G^{λ+Σ}``, the symmetric-index form of the
    recursion with all ambiguity terms set to zero.
    """
    n = L.n
    xi = L.form
    for A in L.fields:
        jets = {s: s.index for s in L.density.jet_symbols() if s.base == A}
        r = max((mi_order(i) for i in jets.values()), default=0)
        if r == 0:
            continue
        G: dict = {}
        for order in range(r, 0, -1):
            for idx in multi_indices(n, order):
                if mi_order(idx) != order:
                    continue
                g = partial(L.density, A.with_index(idx))
                for lam in range(n):
                    up = mi_add(idx, mi_unit(n, lam))
                    if up in G:
                        w = Fraction(idx[lam] + 1, order + 1)
                        g = g - total_derivative(G[up], lam).scale(w)
                if g:
                    G[idx] = g
        for up, g in G.items():
            k = mi_order(up)
            for lam in range(n):
                if not up[lam]:
                    continue
                sig = tuple(c - (1 if i == lam else 0) for i, c in enumerate(up))
                F = g.scale(Fraction(sig[lam] + 1, k))
                xi = xi + wedge(
                    wedge(GradedForm.theta(A.with_index(sig)), GradedForm.scalar(F)),
                    horizontal_volume(n, lam),
                )
    return xi


# ---------------------------------------------------------------------------
# generalized vector fields


class GradedDerivation:
    """A generalized vector field ``υ = υ^λ ∂_λ + υ^A ∂_A``.

    ``horizontal`` maps base slots to coefficients, ``vertical`` maps base
    symbols to coefficients; both may depend on jets of any order.
    """

    def __init__(self, n: int, horizontal: Optional[Mapping] = None,
                 vertical: Optional[Mapping] = None, parity: Optional[int] = None):
        self.n = n
        self.horizontal = {k: v for k, v in (horizontal or {}).items() if v}
        self.vertical = {k.base: v for k, v in (vertical or {}).items() if v}
        if parity is None:
            pars = set()
            for v in self.horizontal.values():
                pars |= v.parities()
            for A, v in self.vertical.items():
                pars |= {(p + A.odd) % 2 for p in v.parities()}
            if len(pars) > 1:
                raise ParityError("generalized vector field is not parity-homogeneous")
            parity = pars.pop() if pars else 0
        self.parity = int(parity)

    def is_projectable(self) -> bool:
        return all(not v.jet_symbols() for v in self.horizontal.values())

    def characteristic(self, A: JetSymbol) -> GradedScalar:
        """``υ^A - υ^μ s^A_μ``, the coefficient of the vertical part."""
        A = A.base
        q = self.vertical.get(A, GradedScalar.zero(self.n))
        for mu, c in self.horizontal.items():
            q = q - c * GradedScalar.symbol(A.jet(mu))
        return q


class ProlongedDerivation(Derivation):
    """The contact prolongation ``υ^λ d_λ + Σ_Λ d_Λ(υ^A - υ^μ s^A_μ) ∂^Λ_A``."""

    def __init__(self, up: GradedDerivation):
        self.source = up
        self._chars: dict = {}
        super().__init__(up.n, up.parity, up.horizontal, self._coefficient)

    def vertical_part_coefficient(self, sym: JetSymbol) -> Optional[GradedScalar]:
        if sym.kind == Kind.COORD:
            return None
        base = sym.base
        if base not in self._chars:
            self._chars[base] = DerivativeCache(self.source.characteristic(base))
        return self._chars[base](sym.index) or None

    def _coefficient(self, sym: JetSymbol) -> Optional[GradedScalar]:
        val = self.vertical_part_coefficient(sym) or GradedScalar.zero(self.n)
        for mu, c in self.source.horizontal.items():
            val = val + c * GradedScalar.symbol(sym.jet(mu))
        return val or None

    def vertical_part(self) -> Derivation:
        return Derivation(self.n, self.parity, vertical=self.vertical_part_coefficient)

    def horizontal_part(self) -> Derivation:
        hor = self.source.horizontal

        def coef(sym):
            val = GradedScalar.zero(self.n)
            for mu, c in hor.items():
                val = val + c * GradedScalar.symbol(sym.jet(mu))
            return val or None

        return Derivation(self.n, self.parity, hor, coef)


def prolong(up: GradedDerivation) -> ProlongedDerivation:
    return ProlongedDerivation(up)


def lie_derivative(theta: Derivation, phi: GradedForm) -> GradedForm:
    """``𝐋_ϑ φ = ϑ⌋dφ + d(ϑ⌋φ)``."""
    return interior_product(theta, d(phi)) + d(interior_product(theta, phi))


def first_variational_terms(L: Lagrangian, up: GradedDerivation) -> dict:
    """The pieces of the first variational formula, by name."""
    theta = prolong(up)
    lie = lie_derivative(theta, L.form)
    dL = delta(L.form)
    xi = lepage_equivalent(L)
    vertical = interior_product(theta.vertical_part(), dL)
    boundary = d_horizontal(contact_part(interior_product(theta, xi), 0))
    hvol = interior_product(theta.horizontal_part(), horizontal_volume(L.n))
    source = wedge(d_vertical(hvol), GradedForm.scalar(L.density))
    return {"lie": lie, "vertical": vertical, "boundary": boundary, "source": source, "lepage": xi}


def first_variational_check(L: Lagrangian, up: GradedDerivation) -> GradedForm:
    """Residual ``𝐋_ϑL - υ_V⌋δL - d_H(h_0(ϑ⌋Ξ_L)) - d_V(υ_H⌋ω)𝓛``; always zero."""
    t = first_variational_terms(L, up)
    return t["lie"] - t["vertical"] - t["boundary"] - t["source"]


@dataclass(frozen=True, eq=False)
class SymmetryResult:
    holds: bool
    lie_derivative: Optional[GradedForm] = None
    sigma: Optional[GradedForm] = None
    current: Optional[GradedForm] = None
    witness: Optional[GradedForm] = None
    reason: str = ""

    def __bool__(self):
        return self.holds


def is_variational_symmetry(L: Lagrangian, up: GradedDerivation) -> SymmetryResult:
    """Decide whether ``𝐋_ϑL`` is ``d_H``-exact on a contractible chart.

    On success the result carries ``σ`` with ``d_Hσ = 𝐋_ϑL`` and the
    conserved current ``h_0(ϑ⌋Ξ_L) - σ``; otherwise the nonzero ``δ(𝐋_ϑL)``.
    """
    from .homotopy import homotopy_density

    if not up.is_projectable():
        return SymmetryResult(False, reason="not projectable: horizontal coefficients depend on jets")
    theta = prolong(up)
    lie = lie_derivative(theta, L.form)
    density_form = project_bidegree(lie, 0, L.n)
    rest = lie - density_form
    if rest:
        return SymmetryResult(False, lie, witness=rest, reason="Lie derivative has contact components")
    witness = delta(density_form)
    if witness:
        return SymmetryResult(False, lie, witness=witness, reason="Lie derivative is not variationally trivial")
    sigma = homotopy_density(density_form)
    current = contact_part(interior_product(theta, lepage_equivalent(L)), 0) - sigma
    return SymmetryResult(True, lie, sigma=sigma, current=current)
