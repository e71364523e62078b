"""Homotopy operators for the horizontal and contact complexes on one chart.

Every λ-integral ``∫_0^1 dλ/λ g(λ s)`` is evaluated monomial by monomial as
the weight ``1/k`` on jet degree ``k``.  Ordered-index sums are carried out
over count multi-indices with the matching multinomial weights.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .errors import BidegreeError, NotClosedError
from .forms import (
    CONTACT,
    HORIZONTAL,
    Derivation,
    GradedForm,
    horizontal_volume,
    interior_product,
    map_coefficients,
    total_derivative_form_multi,
    wedge,
    word_bidegree,
)
from .ring import (
    GradedScalar,
    JetSymbol,
    Kind,
    apply_derivation,
    auxiliary,
    coordinate,
    inverse_degree,
    mi_add,
    mi_factorial,
    mi_order,
    mi_sub,
    mi_submultisets,
    mi_unit,
    mono_degree,
    multi_indices,
    partial,
    substitute_scale,
    total_derivative_multi,
    unauxiliary,
)
from .variational import d_horizontal, delta, rho_projector


# ---------------------------------------------------------------------------
# helpers


def _bidegrees(phi: GradedForm) -> set:
    return {word_bidegree(w) for w in phi.terms}


def _require(phi: GradedForm, k: int, m: Optional[int] = None):
    for kk, mm in _bidegrees(phi):
        if kk != k or (m is not None and mm != m):
            want = f"({k},{m})" if m is not None else f"({k},*)"
            raise BidegreeError(f"expected a {want}-form, got bidegree ({kk},{mm})")


def _degree(phi: GradedForm) -> Optional[int]:
    degs = {mm for _, mm in _bidegrees(phi)}
    if len(degs) > 1:
        raise BidegreeError("form is not of homogeneous horizontal degree")
    return degs.pop() if degs else None


def _ordering_weight(sig, xi, total) -> Fraction:
    """Number of ordered index sequences split as ``Σ``/``Ξ`` per symmetric derivative."""
    def orderings(a):
        return math.factorial(mi_order(a)) // mi_factorial(a)

    return Fraction(orderings(sig) * orderings(xi), orderings(total))


def _jet_bases(f: GradedScalar) -> list:
    return sorted({s.base for s in f.jet_symbols()})


def _total_order(phi: GradedForm) -> int:
    """Largest sum of jet orders over the factors of one monomial."""
    best = 0
    for f in phi.terms.values():
        for even, odd in f.terms:
            t = sum(s.order * e for s, e in even) + sum(s.order for s in odd)
            best = max(best, t)
    return best


def _volume_word(n: int) -> tuple:
    return next(iter(horizontal_volume(n).terms))


def _weighted(phi: GradedForm) -> GradedForm:
    return map_coefficients(phi, lambda f: substitute_scale(f, inverse_degree))


# ---------------------------------------------------------------------------
# fiber split and base homotopy


def fiber_decompose(phi: GradedForm) -> tuple[GradedForm, GradedForm]:
    """Split a horizontal form into its jet-free part and the remainder."""
    _require(phi, 0)
    zero, rest = {}, {}
    for w, f in phi.terms.items():
        for mono, c in f.terms.items():
            target = zero if mono_degree(mono) == 0 else rest
            target.setdefault(w, {})[mono] = c
    mk = lambda d: GradedForm._raw(phi.n, {w: GradedScalar._raw(phi.n, t) for w, t in d.items()})
    return mk(zero), mk(rest)


def base_homotopy(phi: GradedForm) -> GradedForm:
    """Radial homotopy for a closed polynomial form in base coordinates only.

    ``x^α dx^I ↦ (1/(|α|+|I|)) x^α Σ_j (-1)^j x^{I_j} dx^{I∖I_j}``.
    """
    n = phi.n
    out = GradedForm.zero(n)
    for word, f in phi.terms.items():
        if not word:
            if f:
                raise NotClosedError("nonzero constant has no horizontal antiderivative", phi)
            continue
        for mono, c in f.terms.items():
            if mono_degree(mono):
                raise BidegreeError("base homotopy requires coefficients free of jet symbols")
            p = sum(e for _, e in mono[0])
            scal = GradedScalar._raw(n, {mono: c * Fraction(1, p + len(word))})
            for j, (_, lam) in enumerate(word):
                rest = word[:j] + word[j + 1:]
                coord = GradedScalar.symbol(coordinate(lam, n))
                term = GradedForm._raw(n, {rest: scal * coord})
                out = out - term if j % 2 else out + term
    return out


# ---------------------------------------------------------------------------
# the operator D^{+ν}


def d_plus_scalar(f: GradedScalar, nu: int) -> GradedScalar:
    """``D^{+ν} f``: ``Σ Λ_ν s_{Λ-ν} ∂^Λ f`` weighted by ``1/k`` on jet degree k."""
    def image(s: JetSymbol):
        if s.kind == Kind.COORD or not s.index[nu]:
            return None
        lower = list(s.index)
        lower[nu] -= 1
        return GradedScalar.symbol(s.with_index(tuple(lower)), s.index[nu])

    return substitute_scale(apply_derivation(f, image, 0), inverse_degree)


def d_plus(phi: GradedForm, nu: int) -> GradedForm:
    """``D^{+ν}`` applied coefficientwise to a horizontal form."""
    return map_coefficients(phi, lambda f: d_plus_scalar(f, nu))


def _p_operator(phi: GradedForm, k: int) -> GradedForm:
    """``P_k = d_{ν_1}⋯d_{ν_k} D^{+ν_1}⋯D^{+ν_k}``; the factors commute."""
    n = phi.n
    if k == 0:
        return phi
    out = GradedForm.zero(n)
    for idx in multi_indices(n, k):
        if mi_order(idx) != k:
            continue
        mult = math.factorial(k) // mi_factorial(idx)
        g = phi
        for nu, cnt in enumerate(idx):
            for _ in range(cnt):
                g = d_plus(g, nu)
        if g:
            out = out + total_derivative_form_multi(g, idx).scale(mult)
    return out


# ---------------------------------------------------------------------------
# horizontal complex


def _check_closed(phi: GradedForm):
    dphi = d_horizontal(phi)
    if dphi:
        raise NotClosedError("form is not d_H-closed", dphi)


def homotopy_horizontal(phi: GradedForm, with_base: bool = True) -> GradedForm:
    """Antiderivative of a ``d_H``-closed ``(0, 0<m<n)``-form.

    ``ξ = Σ_k (n-m-1)!/(n-m+k)! D^{+ν} P_k (∂_ν ⌋ φ̃)``; with ``with_base``
    the radial antiderivative of the jet-free part is added, so ``d_Hξ = φ``.
    """
    _require(phi, 0)
    n = phi.n
    if not phi:
        return GradedForm.zero(n)
    m = _degree(phi)
    if not 0 < m < n:
        raise BidegreeError(f"horizontal homotopy needs 0 < m < n, got m={m}, n={n}")
    _check_closed(phi)
    phi0, tilde = fiber_decompose(phi)
    xi = GradedForm.zero(n)
    order = _total_order(tilde)
    for nu in range(n):
        g = interior_product(Derivation.coordinate(n, nu), tilde)
        if not g:
            continue
        # each D^{+ν} lowers the summed jet order of a monomial by one, so P_k
        # vanishes beyond it; an intermediate P_k g may still cancel to zero.
        for k in range(order + 1):
            pk = _p_operator(g, k)
            if pk:
                c = Fraction(math.factorial(n - m - 1), math.factorial(n - m + k))
                xi = xi + d_plus(pk, nu).scale(-c if k % 2 else c)
    if with_base and phi0:
        xi = xi + base_homotopy(phi0)
    return xi


def _check_trivial(phi: GradedForm):
    w = delta(phi)
    if w:
        raise NotClosedError("density is not variationally trivial", w)


def homotopy_density(phi: GradedForm, with_base: bool = True) -> GradedForm:
    """Antiderivative ``ξ = Σ J^μ ω_μ`` of a density with ``δφ = 0``.

    ``J^μ = Σ_{Σ+Ξ=Λ} (-1)^{|Σ|} s^A_Ξ d_Σ ∂^{μ+Λ}_A φ̃``, degree-weighted.
    """
    _require(phi, 0, phi.n)
    n = phi.n
    if not phi:
        return GradedForm.zero(n)
    _check_trivial(phi)
    phi0, tilde = fiber_decompose(phi)
    f = tilde.coefficient(_volume_word(n))
    xi = GradedForm.zero(n)
    for mu in range(n):
        J = _density_current(f, mu)
        if J:
            xi = xi + wedge(GradedForm.scalar(substitute_scale(J, inverse_degree)), horizontal_volume(n, mu))
    if with_base and phi0:
        xi = xi + base_homotopy(phi0)
    return xi


def _density_current(f: GradedScalar, mu: int) -> GradedScalar:
    n = f.n
    J = GradedScalar.zero(n)
    unit = mi_unit(n, mu)
    for s in sorted(f.jet_symbols()):
        M = s.index
        lam = mi_sub(M, unit)
        if lam is None:
            continue
        dM = partial(f, s)
        for sig in mi_submultisets(lam):
            xi_idx = mi_sub(lam, sig)
            w = _ordering_weight(sig, xi_idx, M)
            term = GradedScalar.symbol(s.base.with_index(xi_idx)) * total_derivative_multi(dM, sig)
            J = J + term.scale(-w if mi_order(sig) % 2 else w)
    return J


def homotopy_olver(phi: GradedForm, with_base: bool = True) -> GradedForm:
    """The total homotopy operator with symmetric multi-index factorials.

    ``I(φ) = Σ_{Λ,μ} (Λ_μ+1)/(n-m+|Λ|+1) d_Λ[Σ_Ξ (-1)^{|Ξ|}
    (μ+Λ+Ξ)!/((μ+Λ)!Ξ!) s^A d_Ξ ∂^{μ+Λ+Ξ}_A(∂_μ⌋φ)]``, degree-weighted.
    """
    _require(phi, 0)
    n = phi.n
    if not phi:
        return GradedForm.zero(n)
    m = _degree(phi)
    if m == n:
        _check_trivial(phi)
    elif 0 < m < n:
        _check_closed(phi)
    else:
        raise BidegreeError("homotopy needs horizontal degree m > 0")
    phi0, tilde = fiber_decompose(phi)
    out = GradedForm.zero(n)
    for mu in range(n):
        inner = interior_product(Derivation.coordinate(n, mu), tilde)
        if not inner:
            continue
        unit = mi_unit(n, mu)
        for word, g in inner.terms.items():
            acc = GradedScalar.zero(n)
            # group the sum by the total index N = μ+Λ+Ξ of the derivative
            for s in sorted(g.jet_symbols()):
                N = s.index
                rest = mi_sub(N, unit)
                if rest is None:
                    continue
                dg = partial(g, s)
                base = GradedScalar.symbol(s.base)
                for lam in mi_submultisets(rest):
                    xi_idx = mi_sub(rest, lam)
                    ml = mi_add(unit, lam)
                    c = Fraction(mi_factorial(N), mi_factorial(ml) * mi_factorial(xi_idx))
                    c *= Fraction(lam[mu] + 1, n - m + mi_order(lam) + 1)
                    if mi_order(xi_idx) % 2:
                        c = -c
                    inner_term = base * total_derivative_multi(dg, xi_idx)
                    acc = acc + total_derivative_multi(inner_term, lam).scale(c)
            if acc:
                out = out + GradedForm._raw(n, {word: substitute_scale(acc, inverse_degree)})
    if with_base and phi0:
        out = out + base_homotopy(phi0)
    return out


# ---------------------------------------------------------------------------
# contact complex


def _bar(phi: GradedForm) -> GradedForm:
    """``Σ f dx^W θ_s ↦ Σ f s̄ dx^W``."""
    out = GradedForm.zero(phi.n)
    for word, f in phi.terms.items():
        hw, (kind, s) = word[:-1], word[-1]
        out = out + GradedForm._raw(phi.n, {hw: f * GradedScalar.symbol(auxiliary(s))})
    return out


def _unbar(phi: GradedForm) -> GradedForm:
    n = phi.n
    out = GradedForm.zero(n)
    for word, g in phi.terms.items():
        for a in sorted(s for s in g.symbols() if s.kind == Kind.AUX):
            coef = partial(g, a, "right")
            if coef:
                out = out + wedge(
                    GradedForm._raw(n, {word: coef}), GradedForm.theta(unauxiliary(a))
                )
    return out


def homotopy_contact(phi: GradedForm) -> GradedForm:
    """Antiderivative of a ``d_H``-closed ``(1, 0<m<n)``-form via barred variables."""
    _require(phi, 1)
    n = phi.n
    if not phi:
        return GradedForm.zero(n)
    m = _degree(phi)
    if not 0 < m < n:
        raise BidegreeError(f"contact homotopy needs 0 < m < n, got m={m}, n={n}")
    _check_closed(phi)
    barred = _bar(phi)
    return _unbar(homotopy_horizontal(barred, with_base=False))


def homotopy_rho_kernel(sigma: GradedForm) -> GradedForm:
    """Antiderivative of a ``(1,n)``-form in the kernel of ``ρ``.

    ``ξ = -Σ_{Σ+Ξ=Λ} (-1)^{|Σ|} θ^A_Ξ ∧ d_Σ σ^{μ+Λ}_A ω_μ`` where
    ``σ^Λ_A ω = ∂^Λ_A ⌋ σ``.
    """
    _require(sigma, 1, sigma.n)
    n = sigma.n
    if not sigma:
        return GradedForm.zero(n)
    witness = rho_projector(sigma)
    if witness:
        raise NotClosedError("form is not in the kernel of ρ", witness)
    vol_word = _volume_word(n)
    xi = GradedForm.zero(n)
    for s in sorted(sigma.contact_symbols()):
        coef = interior_product(Derivation.partial(s), sigma).coefficient(vol_word)
        M = s.index
        for mu in range(n):
            lam = mi_sub(M, mi_unit(n, mu))
            if lam is None:
                continue
            for sig in mi_submultisets(lam):
                xi_idx = mi_sub(lam, sig)
                w = _ordering_weight(sig, xi_idx, M)
                g = total_derivative_multi(coef, sig)
                term = wedge(
                    wedge(GradedForm.theta(s.base.with_index(xi_idx)), GradedForm.scalar(g)),
                    horizontal_volume(n, mu),
                )
                xi = xi + term.scale(w if mi_order(sig) % 2 else -w)
    return xi
