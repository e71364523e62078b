"""Line-oriented model files.

A model file is a sequence of declarations, one per line; ``#`` starts a
comment and indented lines continue the previous expression::

    base t x
    field A[mu] even
    lagrangian: 1/2*(d(A_x,t) - d(A_t,x))^2
    identity xi stage 0: d(bar(A_t),t) + d(bar(A_x),x)
    assert regularity

Declarations:

``base NAME...``
    Base coordinate names, fixing ``n``.  Must come first.
``field NAME even|odd``
    A scalar field.
``field NAME[i] even|odd`` / ``field NAME[i,j] even|odd [symmetric|antisymmetric]``
    A tensor family expanded to ``NAME_<coords>``.  Symmetric families keep
    sorted index pairs; antisymmetric ones keep strictly sorted pairs and
    alias the rest to ``-NAME_<sorted>`` or zero.
``lagrangian: EXPR``
    The density, an even scalar.
``identity NAME stage K: EXPR``
    A Noether operator written in antifields ``bar(...)``.  Stages must be
    declared in nondecreasing order.  Afterwards ``NAME`` denotes its ghost
    and ``bar(NAME)`` its antifield.
``vector TARGET: EXPR``
    A component of a generalized vector field; ``TARGET`` is a field or a
    base coordinate.
``form: EXPR`` / ``density: EXPR``
    An input for the homotopy command; ``density`` is multiplied by the
    volume form.
``assert regularity``
    Records the regularity hypothesis for the Koszul–Tate construction.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

from .errors import GradedVarError, ModelError
from .forms import GradedForm, horizontal_volume, wedge
from .noether import NoetherOperator, NoetherTower, field_antifield
from .parser import evaluate, parse
from .ring import GradedScalar, JetSymbol, Kind, field as make_field
from .variational import GradedDerivation, Lagrangian

RESERVED = {"d", "dx", "theta", "bar", "aux", "base", "field"}
_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_FIELD = re.compile(
    rf"field\s+(?P<name>{_IDENT})(?:\[(?P<idx>[^\]]*)\])?\s+(?P<parity>\S+)(?:\s+(?P<sym>\S+))?\s*$"
)
_IDENTITY = re.compile(rf"identity\s+(?P<name>{_IDENT})\s+stage\s+(?P<stage>\d+)\s*$")
_VECTOR = re.compile(rf"vector\s+(?P<target>{_IDENT})\s*$")


@dataclass
class Block:
    """An expression block: header info plus its source segments."""

    kind: str
    line: int
    column: int
    segments: list
    name: str = ""
    stage: int = 0


@dataclass
class ModelDeclaration:
    coords: tuple = ()
    fields: dict = dc_field(default_factory=dict)  # name -> JetSymbol
    aliases: dict = dc_field(default_factory=dict)  # name -> (sign, field name)
    blocks: list = dc_field(default_factory=list)
    regularity: bool = False


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _family_members(name, idx_names, coords, symmetry, line, col):
    """Expand a tensor family into (member name, sign, canonical name)."""
    rank = len(idx_names)
    if rank not in (1, 2):
        raise ModelError("tensor families take one or two indices", line, col)
    if symmetry and rank != 2:
        raise ModelError("symmetry is only meaningful for two indices", line, col)
    out = []
    for combo in itertools.product(range(len(coords)), repeat=rank):
        member = name + "_" + "".join(coords[i] for i in combo)
        if rank == 1 or symmetry is None:
            out.append((member, 1, member))
            continue
        a, b = combo
        lo, hi = min(a, b), max(a, b)
        canonical = name + "_" + coords[lo] + coords[hi]
        if symmetry == "symmetric":
            out.append((member, 1, canonical))
        elif a == b:
            out.append((member, 0, None))
        else:
            out.append((member, 1 if a < b else -1, canonical))
    return out


def parse_model(text: str) -> ModelDeclaration:
    """Read declarations; expressions are kept as text until evaluation."""
    decl = ModelDeclaration()
    current: Optional[Block] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).rstrip()
        if not body.strip():
            continue
        if raw[:1] in (" ", "\t"):
            if current is None:
                raise ModelError("continuation line without an expression", lineno, 1)
            current.segments.append((lineno, 1, body))
            continue
        current = None
        head, colon, rest = body.partition(":")
        head = head.strip()
        col_rest = body.find(":") + 2 if colon else len(body) + 1
        if head.startswith("base ") or head == "base":
            if colon:
                raise ModelError("unexpected ':' in base declaration", lineno, len(head) + 1)
            if decl.coords:
                raise ModelError("base declared twice", lineno, 1)
            names = head.split()[1:]
            if not names:
                raise ModelError("base needs at least one coordinate", lineno, 1)
            for nm in names:
                if not re.fullmatch(_IDENT, nm) or nm in RESERVED:
                    raise ModelError(f"invalid coordinate name {nm!r}", lineno, body.find(nm) + 1)
            if len(set(names)) != len(names):
                raise ModelError("duplicate coordinate name", lineno, 1)
            decl.coords = tuple(names)
            continue
        if not decl.coords:
            raise ModelError("the base declaration must come first", lineno, 1)
        if head.startswith("field"):
            _declare_field(decl, body, lineno)
            continue
        if head == "assert regularity" and not colon:
            decl.regularity = True
            continue
        if not colon:
            raise ModelError(f"unknown declaration {head.split()[0]!r}", lineno, 1)
        segment = (lineno, col_rest, body[col_rest - 1:])
        if head in ("lagrangian", "form", "density"):
            current = Block(head, lineno, 1, [segment])
        elif m := _IDENTITY.fullmatch(head):
            current = Block("identity", lineno, 1, [segment], m["name"], int(m["stage"]))
        elif m := _VECTOR.fullmatch(head):
            current = Block("vector", lineno, 1, [segment], m["target"])
        else:
            raise ModelError(f"unknown declaration {head!r}", lineno, 1)
        if any(b.kind == current.kind and current.kind in ("lagrangian", "form", "density")
               for b in decl.blocks) or (
            current.kind in ("form", "density")
            and any(b.kind in ("form", "density") for b in decl.blocks)
        ):
            raise ModelError(f"duplicate {current.kind} block", lineno, 1)
        decl.blocks.append(current)
    if not decl.coords:
        raise ModelError("missing base declaration", 1, 1)
    return decl


def _declare_field(decl: ModelDeclaration, body: str, lineno: int):
    m = _FIELD.fullmatch(body.strip())
    if not m:
        raise ModelError("expected 'field NAME[idx] even|odd [symmetric|antisymmetric]'", lineno, 1)
    name, parity, symmetry = m["name"], m["parity"], m["sym"]
    if parity not in ("even", "odd"):
        raise ModelError(f"parity must be 'even' or 'odd', got {parity!r}", lineno, m.start("parity") + 1)
    if symmetry not in (None, "symmetric", "antisymmetric"):
        raise ModelError(f"unknown symmetry {symmetry!r}", lineno, m.start("sym") + 1)
    if m["idx"] is None:
        if symmetry:
            raise ModelError("symmetry needs an index family", lineno, m.start("sym") + 1)
        members = [(name, 1, name)]
    else:
        idx = [s.strip() for s in m["idx"].split(",")]
        if not all(re.fullmatch(_IDENT, s) for s in idx):
            raise ModelError("invalid index list", lineno, m.start("idx") + 1)
        members = _family_members(name, idx, decl.coords, symmetry, lineno, m.start("idx") + 1)
    n = len(decl.coords)
    for member, sign, canonical in members:
        if member in RESERVED or member in decl.coords or member in decl.fields or member in decl.aliases:
            raise ModelError(f"name {member!r} is already declared", lineno, m.start("name") + 1)
        if canonical == member:
            decl.fields[member] = make_field(member, n, parity == "odd")
        else:
            decl.aliases[member] = (sign, canonical)


class Model:
    """A loaded model: declarations plus lazily evaluated values."""

    def __init__(self, decl: ModelDeclaration, max_jet_order: int = 8, source: str = "<model>"):
        self.decl = decl
        self.coords = decl.coords
        self.n = len(decl.coords)
        self.max_jet_order = max_jet_order
        self.source = source
        self._identities: dict = {}  # name -> NoetherOperator, in declaration order
        self._stage = -1
        self._built = False

    @classmethod
    def from_text(cls, text: str, max_jet_order: int = 8, source: str = "<model>") -> "Model":
        model = cls(parse_model(text), max_jet_order, source)
        model.build()
        return model

    @classmethod
    def from_file(cls, path, max_jet_order: int = 8) -> "Model":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_text(text, max_jet_order, str(path))

    # -- scope protocol

    def coordinate_slot(self, name: str) -> Optional[int]:
        try:
            return self.coords.index(name)
        except ValueError:
            return None

    def resolve(self, name: str, wrapper: str) -> tuple[int, JetSymbol]:
        sign = 1
        if name in self.decl.aliases:
            sign, name = self.decl.aliases[name]
            if name is None:
                # vanishing component: any field symbol will do, scaled by 0
                return 0, next(iter(self.decl.fields.values()))
        if name in self.decl.fields:
            sym = self.decl.fields[name]
            return sign, (field_antifield(sym) if wrapper == "bar" else sym)
        if name in self._identities:
            op = self._identities[name]
            return sign, (op.antifield if wrapper == "bar" else op.ghost)
        if self.coordinate_slot(name) is not None:
            raise ModelError(f"coordinate {name!r} cannot be barred")
        raise ModelError(f"undeclared identifier {name!r}")

    # -- evaluation

    def _eval(self, block: Block):
        value = evaluate(parse(block.segments), self)
        self._check_order(value, block)
        return value

    def _check_order(self, value, block: Block):
        if isinstance(value, GradedForm):
            syms = value.jet_symbols()
        else:
            syms = value.jet_symbols()
        worst = max((s.order for s in syms), default=0)
        if worst > self.max_jet_order:
            raise ModelError(
                f"jet order {worst} exceeds --max-jet-order {self.max_jet_order}", block.line, block.column
            )

    def _scalar(self, block: Block, what: str) -> GradedScalar:
        value = self._eval(block)
        if isinstance(value, GradedForm):
            if not value.is_scalar():
                raise ModelError(f"{what} must be a scalar expression", block.line, block.column)
            value = value.as_scalar()
        return value

    def build(self):
        """Evaluate every block once, in file order, so errors surface early."""
        if self._built:
            return
        self._lagrangian = None
        self._vector = {}
        self._form = None
        for block in self.decl.blocks:
            if block.kind == "lagrangian":
                f = self._scalar(block, "the Lagrangian")
                if not f.is_homogeneous() or f.parity:
                    raise ModelError("the Lagrangian must be even", block.line, block.column)
                self._lagrangian = f
            elif block.kind == "identity":
                self._declare_identity(block)
            elif block.kind == "vector":
                self._declare_vector(block)
            elif block.kind == "form":
                v = self._eval(block)
                self._form = v if isinstance(v, GradedForm) else GradedForm.scalar(v)
            elif block.kind == "density":
                f = self._scalar(block, "a density")
                self._form = wedge(GradedForm.scalar(f), horizontal_volume(self.n))
        self._built = True

    def _declare_identity(self, block: Block):
        name = block.name
        if name in RESERVED or name in self.coords or name in self.decl.fields or name in self.decl.aliases:
            raise ModelError(f"identity name {name!r} clashes with a declaration", block.line, block.column)
        if name in self._identities:
            raise ModelError(f"duplicate identity {name!r}", block.line, block.column)
        if block.stage < self._stage or block.stage > self._stage + 1:
            raise ModelError("identities must be declared stage by stage", block.line, block.column)
        expr = self._scalar(block, "an identity")
        try:
            op = NoetherOperator(name, block.stage, expr)
        except GradedVarError as exc:
            raise ModelError(str(exc), block.line, block.column) from None
        self._identities[name] = op
        self._stage = block.stage

    def _declare_vector(self, block: Block):
        target = block.name
        if target in self._vector:
            raise ModelError(f"duplicate vector component {target!r}", block.line, block.column)
        if self.coordinate_slot(target) is None and target not in self.decl.fields:
            raise ModelError(f"vector target {target!r} is not a field or coordinate", block.line, block.column)
        self._vector[target] = self._scalar(block, "a vector component")

    # -- accessors

    @property
    def fields(self) -> tuple:
        return tuple(self.decl.fields.values())

    def lagrangian(self) -> Lagrangian:
        if self._lagrangian is None:
            raise ModelError("model has no lagrangian")
        return Lagrangian(self._lagrangian, self.fields)

    def identities(self) -> list:
        return list(self._identities.values())

    def tower(self) -> NoetherTower:
        ops = self.identities()
        if not ops:
            raise ModelError("model declares no identities")
        stages = [[op for op in ops if op.stage == k] for k in range(ops[-1].stage + 1)]
        try:
            return NoetherTower(self.lagrangian(), stages, self.decl.regularity)
        except GradedVarError as exc:
            raise ModelError(str(exc)) from None

    def derivation(self) -> GradedDerivation:
        if not self._vector:
            raise ModelError("model declares no vector components")
        horizontal, vertical = {}, {}
        for target, value in self._vector.items():
            slot = self.coordinate_slot(target)
            if slot is not None:
                horizontal[slot] = value
            else:
                vertical[self.decl.fields[target]] = value
        try:
            return GradedDerivation(self.n, horizontal, vertical)
        except GradedVarError as exc:
            raise ModelError(str(exc)) from None

    def form(self) -> GradedForm:
        if self._form is None:
            raise ModelError("model has no form or density block")
        return self._form


def load_model(path, max_jet_order: int = 8) -> Model:
    return Model.from_file(path, max_jet_order)
