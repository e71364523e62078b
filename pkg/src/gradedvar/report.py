"""Structured, deterministic command reports.

A report is an ordered list of ``(key, value)`` pairs.  Values are strings,
booleans or integers; expressions are pretty-printed before they are added.

Formats:

``text``
    one ``key: value`` line per entry; booleans print as ``true``/``false``.
``kv``
    one ``key=<value as a JSON string>`` line per entry, so values with
    spaces or quotes survive a round trip through ``json.loads``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .printer import pretty_print

FORMATS = ("text", "kv")

Scalar = Union[str, bool, int]


def _render_value(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass
class Report:
    command: str
    coords: Optional[Sequence[str]] = None
    entries: list = field(default_factory=list)

    def __post_init__(self):
        self.add("command", self.command)

    def add(self, key: str, value: Scalar):
        if "\n" in str(value):
            raise ValueError(f"report value for {key!r} spans lines")
        self.entries.append((key, value))

    def expr(self, key: str, value):
        self.add(key, pretty_print(value, self.coords))

    def get(self, key: str):
        for k, v in self.entries:
            if k == key:
                return v
        raise KeyError(key)

    def render(self, fmt: str = "text") -> str:
        if fmt == "text":
            lines = [f"{k}: {_render_value(v)}" for k, v in self.entries]
        elif fmt == "kv":
            lines = [f"{k}={json.dumps(_render_value(v), ensure_ascii=False)}" for k, v in self.entries]
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        return "\n".join(lines) + "\n"


def parse_kv(text: str) -> list[tuple[str, str]]:
    """Read back a ``kv`` report."""
    out = []
    for line in text.splitlines():
        if not line:
            continue
        key, _, raw = line.partition("=")
        out.append((key, json.loads(raw)))
    return out
