"""Noether identities, the Koszul–Tate operator and gauge symmetries.

A stage-k Noether operator is stored as its density coefficient in the
antifield ring: ``Δ_r = Σ Δ_r^{A,Λ} s̄_{ΛA}`` at stage 0 and
``Δ_{r_k} = Σ Δ^{r_{k-1},Λ} c̄_{Λ r_{k-1}} + h_{r_k}`` above it, where the
optional ``h_{r_k}`` is bilinear in ``c̄_{r_{k-2}}`` (or ``s̄`` for k = 1) and
``s̄``.  Both ``δ̄`` and ``δ_KT`` act as odd right derivations.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import TowerError, UnsupportedShapeError
from .forms import GradedForm, horizontal_volume, wedge
from .ring import (
    DerivativeCache,
    GradedScalar,
    JetSymbol,
    Kind,
    antifield,
    apply_derivation,
    eta_transform,
    ghost,
    mi_order,
    mi_zero,
    partial,
    total_derivative_multi,
)
from .variational import (
    GradedDerivation,
    Lagrangian,
    SymmetryResult,
    d_horizontal,
    euler_lagrange,
    is_variational_symmetry,
    variational_derivative,
)


def field_antifield(A: JetSymbol) -> JetSymbol:
    """``s̄_A``: opposite parity, antifield number 1."""
    return antifield(A.name, A.n, not A.odd, -1)


def _antifields(f: GradedScalar) -> list:
    return [s for s in f.jet_symbols() if s.kind == Kind.ANTIFIELD]


def _mono_antifields(mono) -> list:
    even, odd = mono
    out = []
    for s, e in even:
        if s.kind == Kind.ANTIFIELD:
            out.extend([s] * e)
    out.extend(s for s in odd if s.kind == Kind.ANTIFIELD)
    return out


# ---------------------------------------------------------------------------
# operators and towers


@dataclass(frozen=True, eq=False)
class NoetherOperator:
    """One Noether operator ``Δ_r`` of a given stage."""

    name: str
    stage: int
    expression: GradedScalar

    def __post_init__(self):
        if self.stage < 0:
            raise TowerError("stages start at 0")
        if not self.expression.is_homogeneous():
            raise TowerError(f"identity {self.name} is not parity-homogeneous")

    @property
    def n(self) -> int:
        return self.expression.n

    @property
    def parity(self) -> int:
        return int(self.expression.parity)

    @property
    def antifield(self) -> JetSymbol:
        """``c̄_r``, of parity ``[Δ_r]+1`` and antifield number ``k+2``."""
        return antifield(self.name, self.n, not self.parity, self.stage)

    @property
    def ghost(self) -> JetSymbol:
        """``c^r``, of parity ``[Δ_r]`` and ghost number ``k+1``."""
        return ghost(self.name, self.n, bool(self.parity), self.stage)

    def split(self) -> tuple[GradedScalar, GradedScalar]:
        """The part linear in antifields and the bilinear ``h``-part."""
        lin, quad = {}, {}
        for mono, c in self.expression.terms.items():
            k = len(_mono_antifields(mono))
            if k == 1:
                lin[mono] = c
            elif k == 2 and self.stage >= 1:
                quad[mono] = c
            else:
                raise UnsupportedShapeError(
                    f"identity {self.name}: terms with {k} antifields are not supported at stage {self.stage}"
                )
        return GradedScalar._raw(self.n, lin), GradedScalar._raw(self.n, quad)

    @property
    def linear_part(self) -> GradedScalar:
        return self.split()[0]

    @property
    def h_term(self) -> GradedScalar:
        return self.split()[1]

    def coefficients(self) -> dict:
        """``{(target base, Λ): Δ^{target,Λ}}`` read with right derivatives."""
        lin = self.linear_part
        out = {}
        for s in sorted(_antifields(lin)):
            c = partial(lin, s, "right")
            if c:
                out[(s.base, s.index)] = c
        return out

    def coefficient_tuple(self, target: JetSymbol) -> dict:
        """``{Λ: Δ^{target,Λ}}`` for one target generator."""
        base = target.base
        return {idx: c for (t, idx), c in self.coefficients().items() if t == base}


def operator_from_coefficients(name: str, stage: int, coefficients: dict, n: int) -> NoetherOperator:
    """Assemble ``Σ Δ^{t,Λ} t_Λ`` from ``{(t, Λ): coefficient}``."""
    expr = GradedScalar.zero(n)
    for (t, idx), c in coefficients.items():
        expr = expr + c * GradedScalar.symbol(t.with_index(idx))
    return NoetherOperator(name, stage, expr)


@dataclass(frozen=True, eq=False)
class StageResult:
    stage: int
    name: str
    holds: bool
    residual: GradedScalar

    def __bool__(self):
        return self.holds


class NoetherTower:
    """User-declared Noether operators of stages ``0..N`` for a Lagrangian.

    ``regularity_asserted`` records the homology regularity hypothesis; it is
    carried along but never checked.
    """

    def __init__(self, lagrangian: Lagrangian, stages: Sequence[Sequence[NoetherOperator]],
                 regularity_asserted: bool = False):
        self.lagrangian = lagrangian
        self.stages = [list(ops) for ops in stages]
        while self.stages and not self.stages[-1]:
            self.stages.pop()
        self.regularity_asserted = regularity_asserted
        self._results: dict = {}
        names = set()
        for k, ops in enumerate(self.stages):
            for op in ops:
                if op.stage != k:
                    raise TowerError(f"identity {op.name} declared at stage {op.stage}, listed at {k}")
                if op.name in names:
                    raise TowerError(f"duplicate identity name {op.name!r}")
                names.add(op.name)
        for k, ops in enumerate(self.stages):
            for op in ops:
                self._check_shape(op)

    @property
    def n(self) -> int:
        return self.lagrangian.n

    @property
    def depth(self) -> int:
        return len(self.stages) - 1

    def operators(self, stage: int) -> list:
        return self.stages[stage] if 0 <= stage < len(self.stages) else []

    def all_operators(self) -> list:
        return [op for ops in self.stages for op in ops]

    def targets(self, stage: int) -> list:
        """Antifields one stage below: ``s̄_A`` for stage 0."""
        if stage == 0:
            return [field_antifield(A) for A in self.lagrangian.fields]
        return [op.antifield for op in self.operators(stage - 1)]

    def antifields(self) -> list:
        return self.targets(0) + [op.antifield for op in self.all_operators()]

    def ghosts(self) -> list:
        return [op.ghost for op in self.all_operators()]

    def _check_shape(self, op: NoetherOperator):
        lin, h = op.split()
        allowed = {t.base for t in self.targets(op.stage)}
        for s in _antifields(lin):
            if s.base not in allowed:
                raise UnsupportedShapeError(f"identity {op.name} refers to {s.name} outside stage {op.stage - 1}")
        fields_bar = {t.base for t in self.targets(0)}
        lower = fields_bar if op.stage == 1 else {t.base for t in self.targets(op.stage - 1)}
        for mono in h.terms:
            afs = sorted(s.base for s in _mono_antifields(mono))
            kinds = [a in fields_bar for a in afs]
            if op.stage == 1:
                ok = all(kinds)
            else:
                ok = sum(kinds) == 1 and any(a in lower for a in afs)
            if not ok:
                raise UnsupportedShapeError(f"identity {op.name}: h-term has unsupported antifield content")
        for s in op.expression.jet_symbols():
            if s.kind == Kind.GHOST:
                raise TowerError(f"identity {op.name} must not contain ghosts")

    # -- cached Euler–Lagrange data

    def euler_lagrange(self) -> dict:
        if "el" not in self._results:
            self._results["el"] = euler_lagrange(self.lagrangian).components
        return self._results["el"]

    def dbar(self, f: GradedScalar) -> GradedScalar:
        """``δ̄``: the odd right derivation ``s̄_{ΛA} ↦ d_Λ E_A``."""
        return apply_derivation(f, self._dbar_image, 1, "right")

    def _dbar_image(self, s: JetSymbol):
        if s.kind != Kind.ANTIFIELD or s.stage != -1:
            return None
        cache = self._cache("E", s.base)
        return cache(s.index) or None

    def _cache(self, kind: str, key):
        slot = self._results.setdefault(kind, {})
        if key not in slot:
            if kind == "E":
                A = next(A for A in self.lagrangian.fields if field_antifield(A) == key)
                slot[key] = DerivativeCache(self.euler_lagrange()[A])
            else:
                slot[key] = DerivativeCache(self._by_antifield()[key].expression)
        return slot[key]

    def _by_antifield(self) -> dict:
        return {op.antifield.base: op for op in self.all_operators()}

    # -- verification

    def verify(self) -> list:
        """Verify every stage in order; the results are cached."""
        out = []
        for k in range(len(self.stages)):
            out.extend(verify_stage(self, k) if k else verify_noether_all(self))
        return out

    def is_verified(self) -> bool:
        return all(self.verify())


def verify_noether(L: Lagrangian, delta_op: NoetherOperator) -> StageResult:
    """Check ``Σ Δ^{A,Λ} d_Λ E_A = 0`` for a stage-0 operator."""
    tower = NoetherTower(L, [[delta_op]])
    return verify_noether_all(tower)[0]


def verify_noether_all(tower: NoetherTower) -> list:
    key = ("stage", 0)
    if key not in tower._results:
        res = []
        for op in tower.operators(0):
            r = tower.dbar(op.expression)
            res.append(StageResult(0, op.name, not r, r))
        tower._results[key] = res
    return tower._results[key]


def _lower_linear(tower: NoetherTower, k: int, f: GradedScalar) -> GradedScalar:
    """Replace ``c̄_{Λ r_{k-1}}`` by ``d_Λ`` of the linear part of ``Δ_{r_{k-1}}``."""
    ops = {op.antifield.base: op for op in tower.operators(k - 1)}
    lin_cache = {}

    def image(s):
        if s.kind != Kind.ANTIFIELD or s.base not in ops:
            return None
        if s.base not in lin_cache:
            lin_cache[s.base] = DerivativeCache(ops[s.base].linear_part)
        return lin_cache[s.base](s.index) or None

    return apply_derivation(f, image, 1, "right")


def verify_stage(tower: NoetherTower, k: int) -> list:
    """Check the complete k-stage identities
    ``Σ Δ^{r_{k-1},Λ}_{r_k} d_Λ(lin Δ_{r_{k-1}}) + δ̄ h_{r_k} = 0``."""
    if k == 0:
        return verify_noether_all(tower)
    if not 0 < k < len(tower.stages):
        raise TowerError(f"tower has no stage {k}")
    for j in range(k):
        done = tower._results.get(("stage", j))
        if done is None or not all(done):
            raise TowerError(f"stage {j} must be verified before stage {k}")
    key = ("stage", k)
    if key not in tower._results:
        res = []
        for op in tower.operators(k):
            lin, h = op.split()
            r = _lower_linear(tower, k, lin) + tower.dbar(h)
            res.append(StageResult(k, op.name, not r, r))
        tower._results[key] = res
    return tower._results[key]


def verify_tower(tower: NoetherTower) -> list:
    """Verify all stages in order, stopping at the first failing stage."""
    out = []
    for k in range(len(tower.stages)):
        res = verify_stage(tower, k)
        out.extend(res)
        if not all(res):
            break
    return out


# ---------------------------------------------------------------------------
# Koszul–Tate operator


class KoszulTateOperator:
    """``δ_KT = δ̄ + Σ ∂⃖^r Δ_r + Σ ∂⃖^{r_k} Δ_{r_k}``, an odd right derivation."""

    def __init__(self, tower: NoetherTower):
        self.tower = tower
        self._ops = tower._by_antifield()
        self._caches: dict = {}

    @property
    def n(self) -> int:
        return self.tower.n

    def image(self, s: JetSymbol) -> Optional[GradedScalar]:
        if s.kind != Kind.ANTIFIELD:
            return None
        if s.stage == -1:
            return self.tower._dbar_image(s)
        base = s.base
        if base not in self._caches:
            self._caches[base] = DerivativeCache(self._ops[base].expression)
        return self._caches[base](s.index) or None

    def __call__(self, f: GradedScalar) -> GradedScalar:
        return apply_derivation(f, self.image, 1, "right")

    def generators(self) -> list:
        gens = [GradedScalar.symbol(A) for A in self.tower.lagrangian.fields]
        gens += [GradedScalar.symbol(a) for a in self.tower.antifields()]
        gens += [GradedScalar.symbol(c) for c in self.tower.ghosts()]
        return gens

    def nilpotency_residuals(self) -> dict:
        """``δ_KT(δ_KT(g))`` for every generator ``g``."""
        out = {}
        for g in self.generators():
            (sym,) = g.symbols()
            out[sym] = self(self(g))
        return out

    def is_nilpotent(self) -> bool:
        return not any(self.nilpotency_residuals().values())


def koszul_tate(L: Lagrangian, tower: NoetherTower) -> KoszulTateOperator:
    """Build ``δ_KT`` for a verified tower and confirm nilpotency on generators."""
    if tower.lagrangian is not L and tower.lagrangian.density != L.density:
        raise TowerError("tower belongs to a different Lagrangian")
    results = verify_tower(tower)
    if not all(results) or len({r.stage for r in results}) < len(tower.stages):
        bad = next((r for r in results if not r), None)
        raise TowerError(f"tower is not verified (identity {bad.name if bad else '?'} fails)")
    kt = KoszulTateOperator(tower)
    residuals = kt.nilpotency_residuals()
    bad = [s for s, r in residuals.items() if r]
    if bad:
        raise UnsupportedShapeError(
            "stage identities hold but δ_KT is not nilpotent; higher h-terms would be needed",
        )
    return kt


def extended_lagrangian(L: Lagrangian, tower: NoetherTower) -> Lagrangian:
    """``L_e = L + Σ c^{r_k} Δ_{r_k} ω``."""
    dens = L.density
    for op in tower.all_operators():
        dens = dens + GradedScalar.symbol(op.ghost) * op.expression
    fields = tuple(L.fields)
    return Lagrangian(dens, fields)


@dataclass(frozen=True, eq=False)
class ExactSymmetryCertificate:
    """``δ_KT 𝓛_e = 0`` and the split first variational identity with its ``σ``."""

    kt_of_density: GradedScalar
    divergence: GradedForm
    sigma: Optional[GradedForm]
    holds: bool

    def __bool__(self):
        return self.holds


def kt_symmetry_certificate(L: Lagrangian, tower: NoetherTower) -> ExactSymmetryCertificate:
    """Certify that ``δ_KT`` is an exact symmetry of ``L_e``.

    Computes ``δ_KT 𝓛_e`` (zero) and
    ``[Σ (δ⃖𝓛_e/δs̄_A) E_A + Σ (δ⃖𝓛_e/δc̄_{r_k}) Δ_{r_k}] ω = d_Hσ``
    with ``σ`` from the density homotopy.
    """
    from .homotopy import homotopy_density
    from .errors import NotClosedError

    kt = koszul_tate(L, tower)
    Le = extended_lagrangian(L, tower)
    direct = kt(Le.density)
    n = L.n
    total = GradedScalar.zero(n)
    E = tower.euler_lagrange()
    for A in L.fields:
        total = total + variational_derivative(Le.density, field_antifield(A), "right") * E[A]
    for op in tower.all_operators():
        total = total + variational_derivative(Le.density, op.antifield, "right") * op.expression
    div = wedge(GradedForm.scalar(total), horizontal_volume(n))
    try:
        sigma = homotopy_density(div)
    except NotClosedError:
        return ExactSymmetryCertificate(direct, div, None, False)
    holds = not direct and d_horizontal(sigma) == div
    return ExactSymmetryCertificate(direct, div, sigma, holds)


# ---------------------------------------------------------------------------
# gauge symmetries


def _eta_apply(ghost_sym: JetSymbol, coeffs: dict, n: int) -> GradedScalar:
    """``Σ_Λ c_Λ η(f)^Λ``."""
    out = GradedScalar.zero(n)
    for idx, g in eta_transform(coeffs, n).items():
        out = out + GradedScalar.symbol(ghost_sym.with_index(idx)) * g
    return out


def gauge_symmetry(tower: NoetherTower, require_verified: bool = True) -> GradedDerivation:
    """``u = u^A ∂_A`` with ``u^A = Σ c^r_Λ η(Δ^A_r)^Λ``."""
    res = verify_stage(tower, 0) if tower.stages and require_verified else []
    if not all(res):
        raise TowerError("stage-0 identities do not hold")
    n = tower.n
    vertical = {}
    for A in tower.lagrangian.fields:
        bar = field_antifield(A)
        uA = GradedScalar.zero(n)
        for op in tower.operators(0):
            uA = uA + _eta_apply(op.ghost, op.coefficient_tuple(bar), n)
        vertical[A] = uA
    return GradedDerivation(n, vertical=vertical, parity=1)


def gauge_symmetry_from_variational_derivative(tower: NoetherTower) -> dict:
    """``δ⃖(Σ c^rΔ_r)/δs̄_A``, the same components obtained without ``η``."""
    n = tower.n
    total = GradedScalar.zero(n)
    for op in tower.operators(0):
        total = total + GradedScalar.symbol(op.ghost) * op.linear_part
    return {A: variational_derivative(total, field_antifield(A), "right") for A in tower.lagrangian.fields}


def higher_gauge_symmetry(tower: NoetherTower, k: int, require_verified: bool = True) -> dict:
    """``u^{r_{k-1}} = Σ c^{r_k}_Λ η(Δ^{r_{k-1}}_{r_k})^Λ``, keyed by the ghost ``c^{r_{k-1}}``."""
    if k < 1:
        raise TowerError("higher-stage gauge symmetries start at k = 1")
    if require_verified:
        verify_tower(tower)
        res = verify_stage(tower, k)
        if not all(res):
            raise TowerError(f"stage-{k} identities do not hold")
    n = tower.n
    out = {}
    for low in tower.operators(k - 1):
        u = GradedScalar.zero(n)
        for op in tower.operators(k):
            u = u + _eta_apply(op.ghost, op.coefficient_tuple(low.antifield), n)
        out[low.ghost] = u
    return out


def ascent_components(tower: NoetherTower, k: int, require_verified: bool = True) -> dict:
    """Components ``u^{r_{k-1}}`` keyed by base symbol; k = 0 gives ``u^A``."""
    if k == 0:
        return dict(gauge_symmetry(tower, require_verified).vertical)
    return higher_gauge_symmetry(tower, k, require_verified)


def h_coefficients(tower: NoetherTower, op: NoetherOperator) -> dict:
    """``{((R,Σ),(A,Ξ)): h^{(R,Σ)(A,Ξ)}}`` with ``h = Σ h^{..} c̄_{ΣR} s̄_{ΞA}``.

    At stage 1 both factors are field antifields and the sum runs over
    ordered pairs, so each unordered pair is counted twice; this is the
    normalisation under which the gauge condition holds.
    """
    h = op.h_term
    fields_bar = {t.base for t in tower.targets(0)}
    out = {}
    syms = sorted(_antifields(h))
    for a in syms:
        if a.base not in fields_bar:
            continue
        ha = partial(h, a, "right")
        for r in syms:
            if op.stage > 1 and r.base in fields_bar:
                continue
            c = partial(ha, r, "right")
            if c:
                out[((r.base, r.index), (a.base, a.index))] = c
    return out


@dataclass(frozen=True, eq=False)
class GaugeConditionResult:
    stage: int
    lhs: dict
    rhs: dict
    alpha: dict

    @property
    def residuals(self) -> dict:
        return {k: self.lhs[k] - self.rhs[k] for k in self.lhs}

    @property
    def holds(self) -> bool:
        return not any(self.residuals.values())

    def __bool__(self):
        return self.holds


def _prolonged_action(n: int, comps: dict, f: GradedScalar) -> GradedScalar:
    """``Σ d_Σ u^{r} ∂^Σ_r f``, a left odd derivation on ghost jets."""
    caches = {g.base: DerivativeCache(u) for g, u in comps.items()}

    def image(s):
        c = caches.get(s.base) if s.kind == Kind.GHOST else None
        return c(s.index) or None if c else None

    return apply_derivation(f, image, 1, "left")


def gauge_condition(tower: NoetherTower, k: int, require_verified: bool = True) -> GaugeConditionResult:
    """Evaluate both sides of the k-stage gauge condition.

    ``Σ d_Σ u^{r_{k-1}} ∂^Σ_{r_{k-1}} u^{r_{k-2}} = δ̄(α^{r_{k-2}})`` with
    ``α^{r_{k-2}} = -Σ η(h_{r_k}^{(r_{k-2})(A,Ξ)})^Σ d_Σ(c^{r_k} s̄_{ΞA})``.
    ``require_verified=False`` skips the stage checks so that both sides can
    be compared on towers whose identities fail.
    """
    n = tower.n
    upper = higher_gauge_symmetry(tower, k, require_verified)
    lower = ascent_components(tower, k - 1, require_verified)
    lhs, rhs, alphas = {}, {}, {}
    for key, target in lower.items():
        lhs[key] = _prolonged_action(n, upper, target)
        # the antifield paired with this component
        bar = field_antifield(key) if k == 1 else _antifield_of_ghost(tower, key)
        alpha = GradedScalar.zero(n)
        for op in tower.operators(k):
            coeffs = h_coefficients(tower, op)
            grouped: dict = {}
            for ((R, sig), (A, xi)), c in coeffs.items():
                if R == bar.base:
                    grouped.setdefault((A, xi), {})[sig] = c
            for (A, xi), tup in grouped.items():
                inner = GradedScalar.symbol(op.ghost) * GradedScalar.symbol(A.with_index(xi))
                for sig, g in eta_transform(tup, n).items():
                    alpha = alpha - g * total_derivative_multi(inner, sig)
        alphas[key] = alpha
        rhs[key] = tower.dbar(alpha)
    return GaugeConditionResult(k, lhs, rhs, alphas)


def _antifield_of_ghost(tower: NoetherTower, g: JetSymbol) -> JetSymbol:
    for op in tower.all_operators():
        if op.ghost == g.base:
            return op.antifield
    raise TowerError(f"no identity owns ghost {g.name}")


def reproduce_identities(tower: NoetherTower, k: int, components: Optional[dict] = None) -> list:
    """Recover the stage-k operators from the gauge symmetry.

    Takes ``δ/δc^{r_k}`` of ``Σ u^{t} t̄`` (the ghost-linear density with
    ``E_A`` kept as the symbols ``s̄_A``) and adds the ``h``-part of the
    identity that accompanies it; returns one ``NoetherOperator`` per ghost.
    """
    n = tower.n
    if components is None:
        components = ascent_components(tower, k)
    density = GradedScalar.zero(n)
    for key, u in components.items():
        bar = field_antifield(key) if k == 0 else _antifield_of_ghost(tower, key)
        density = density + u * GradedScalar.symbol(bar)
    out = []
    for op in tower.operators(k):
        lin = variational_derivative(density, op.ghost)
        out.append(NoetherOperator(op.name, k, lin + op.h_term))
    return out


def verify_boundary(tower: NoetherTower, candidate: NoetherOperator, boundary: GradedScalar) -> bool:
    """A stage-0 identity is trivial when it equals ``δ̄`` of the supplied chain."""
    return tower.dbar(boundary) == candidate.expression
