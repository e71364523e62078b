"""Randomized identity checks shared by ``selftest`` and the test suite.

Each check draws one random instance from a ``RandomGenerator`` and returns
``None`` on success or a short description of the failure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import GradedVarError
from .forms import GradedForm, contact_part
from .homotopy import (
    homotopy_contact,
    homotopy_density,
    homotopy_horizontal,
    homotopy_olver,
    homotopy_rho_kernel,
)
from .parser import evaluate, parse
from .printer import default_coordinates, pretty_print
from .randomgen import RandomGenerator, Shape, exact_density
from .ring import eta_transform
from .variational import (
    d,
    d_horizontal,
    d_vertical,
    delta,
    exterior_derivative,
    first_variational_check,
    lepage_equivalent,
    rho_projector,
)


def check_nilpotency(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=3)
    phi = gen.form(shape)
    dh, dv = d_horizontal(phi), d_vertical(phi)
    if d_horizontal(dh):
        return f"d_H^2 != 0 on {phi!r}"
    if d_vertical(dv):
        return f"d_V^2 != 0 on {phi!r}"
    if d_horizontal(dv) + d_vertical(dh):
        return f"d_H d_V + d_V d_H != 0 on {phi!r}"
    if d(phi) != exterior_derivative(phi):
        return f"d_H + d_V differs from d on {phi!r}"
    return None


def check_projector(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=2)
    fields = gen.fields(shape)
    k = gen.rng.randint(1, 2)
    phi = gen.form(shape, fields, k=k, m=shape.n)
    rho = rho_projector(phi)
    if rho and rho_projector(rho) != rho:
        return f"rho is not idempotent on {phi!r}"
    psi = gen.form(shape, fields, k=k, m=shape.n - 1)
    dpsi = d_horizontal(psi)
    if dpsi and rho_projector(dpsi):
        return f"rho(d_H psi) != 0 for {psi!r}"
    return None


def check_lepage(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=2)
    L = gen.lagrangian(shape)
    if d(L.form) != delta(L.form) - d_horizontal(lepage_equivalent(L)):
        return f"Lepage identity fails for {L.density!r}"
    return None


def check_first_variation(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=2)
    fields = gen.fields(shape)
    L = gen.lagrangian(shape, fields)
    up = gen.derivation(shape, fields)
    residual = first_variational_check(L, up)
    if residual:
        return f"first variational residual {residual!r}"
    return None


def check_eta(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=1)
    fields = gen.fields(shape)
    f = gen.eta_tuple(shape, fields, max_index=3)
    back = eta_transform(eta_transform(f, shape.n), shape.n)
    if back != f:
        return f"eta is not an involution on {f!r}"
    return None


def _homotopy_case(gen: RandomGenerator, shape: Shape, fields, kind: str) -> Optional[str]:
    n = shape.n
    if kind in ("horizontal", "olver") and n >= 2:
        phi = gen.exact(shape, fields, 0, gen.rng.randint(1, n - 1))
    elif kind in ("density", "olver"):
        phi = exact_density(gen, shape, fields)
    elif kind == "contact" and n >= 2:
        phi = gen.exact(shape, fields, 1, gen.rng.randint(1, n - 1))
    elif kind == "rho-kernel":
        phi = gen.exact(shape, fields, 1, n)
    else:
        return None
    op = {
        "horizontal": homotopy_horizontal,
        "density": homotopy_density,
        "olver": homotopy_olver,
        "contact": homotopy_contact,
        "rho-kernel": homotopy_rho_kernel,
    }[kind]
    xi = op(phi)
    if d_horizontal(xi) != phi:
        return f"{kind} homotopy fails on {phi!r}"
    return None


def check_homotopy(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=2, degree=2)
    shape.terms = 2
    fields = gen.fields(shape)
    kind = gen.rng.choice(["horizontal", "density", "olver", "contact", "rho-kernel"])
    return _homotopy_case(gen, shape, fields, kind)


class _Scope:
    """A scope resolving the generator's field names."""

    def __init__(self, n, fields):
        self.n = n
        self.coords = default_coordinates(n)
        self.fields = {A.name: A for A in fields}

    def coordinate_slot(self, name):
        return self.coords.index(name) if name in self.coords else None

    def resolve(self, name, wrapper):
        from .errors import ModelError
        from .noether import field_antifield

        if name not in self.fields:
            raise ModelError(f"undeclared identifier {name!r}")
        A = self.fields[name]
        return 1, (field_antifield(A) if wrapper == "bar" else A)


def check_roundtrip(gen: RandomGenerator) -> Optional[str]:
    shape = gen.shape(max_n=3, max_order=2)
    fields = gen.fields(shape)
    value = gen.form(shape, fields) if gen.rng.random() < 0.5 else gen.scalar(shape, fields)
    text = pretty_print(value)
    back = evaluate(parse(text), _Scope(shape.n, fields))
    if isinstance(value, GradedForm) and not isinstance(back, GradedForm):
        back = GradedForm.scalar(back)
    if not isinstance(value, GradedForm) and isinstance(back, GradedForm):
        value = GradedForm.scalar(value)
    if back != value:
        return f"round trip changed {text!r}"
    return None


CHECKS: dict[str, Callable[[RandomGenerator], Optional[str]]] = {
    "nilpotency": check_nilpotency,
    "projector": check_projector,
    "lepage": check_lepage,
    "first-variation": check_first_variation,
    "eta-involution": check_eta,
    "homotopy": check_homotopy,
    "roundtrip": check_roundtrip,
}


@dataclass
class CheckSummary:
    name: str
    passed: int = 0
    total: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def run_checks(seed: int, count: int, names=None) -> list[CheckSummary]:
    out = []
    for name in names or CHECKS:
        gen = RandomGenerator(f"{seed}:{name}")
        summary = CheckSummary(name)
        for _ in range(count):
            summary.total += 1
            try:
                msg = CHECKS[name](gen)
            except GradedVarError as exc:
                msg = f"{type(exc).__name__}: {exc}"
            if msg is None:
                summary.passed += 1
            else:
                summary.failures.append(msg)
        out.append(summary)
    return out
