"""Deterministic report trees, compact class notation, and text/structured rendering."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import Any, Sequence

from .cdga import Element, Presentation
from .exactlin import ONE, Scalar, format_scalar
from .hodge import TransferDiagram

SCHEMA_VERSION = 1
MACRON = "̄"


def _glyph(name: str) -> str:
    if name.endswith("bar") and len(name) > 3:
        return unicodedata.normalize("NFC", name[:-3] + MACRON)
    return name


def compact_monomial(pres: Presentation, mask: int) -> str:
    """``a ^ b ^ abar`` as ``abā``; multi-letter names are separated by spaces."""
    if not mask:
        return "1"
    names = [pres.generators[k].name for k in range(pres.n) if mask >> k & 1]
    glyphs = [_glyph(n) for n in names]
    stems = [n[:-3] if n.endswith("bar") and len(n) > 3 else n for n in names]
    sep = "" if all(len(s) == 1 for s in stems) else " "
    return sep.join(glyphs)


def _coeff(c: Scalar, body: str) -> str:
    if c == ONE:
        return body
    if c == -ONE:
        return "-" + body
    text = format_scalar(c)
    if c.re and c.im:
        text = f"({text})"
    return text + body


def compact_element(x: Element) -> str:
    if not x.terms:
        return "0"
    pres = x.alg.presentation
    order = sorted(x.terms, key=lambda m: x.alg.position.get(m, m))
    parts = []
    for m in order:
        mono = compact_monomial(pres, m)
        parts.append(_coeff(x.terms[m], mono) if mono != "1" else format_scalar(x.terms[m]))
    return _join(parts)


def _join(parts: Sequence[str]) -> str:
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def class_labels(T: TransferDiagram) -> list[str]:
    return [compact_element(T.class_rep(k)) for k in range(T.rank)]


def class_str(labels: Sequence[str], vec: Sequence[Scalar]) -> str:
    """Coordinates in the class basis rendered as e.g. ``2i[bcb̄c̄] - [ab]``."""
    parts = [_coeff(v, f"[{labels[k]}]") for k, v in enumerate(vec) if v]
    return _join(parts) if parts else "0"


def bidegree_str(bd: tuple[int, int] | None) -> str:
    return "none (zero operation)" if bd is None else f"({bd[0]},{bd[1]})"


@dataclass
class Report:
    """Ordered tree of sections plus the asserted checks that decide the exit status."""

    command: str
    subject: str
    asserted: dict[str, bool] = field(default_factory=dict)
    sections: dict[str, Any] = field(default_factory=dict)
    summary: list[str] = field(default_factory=list)

    def check(self, name: str, ok: bool) -> bool:
        self.asserted[name] = bool(ok)
        return bool(ok)

    def section(self, name: str, value: Any) -> None:
        self.sections[name] = value

    @property
    def ok(self) -> bool:
        return all(self.asserted.values())

    def tree(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "subject": self.subject,
            "asserted": dict(self.asserted),
            "status": "pass" if self.ok else "fail",
            "sections": self.sections,
            "summary": list(self.summary),
        }

    def to_structured(self) -> str:
        return json.dumps(_plain(self.tree()), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"{self.command}: {self.subject}"]
        if self.asserted:
            lines.append("checks:")
            for k, v in self.asserted.items():
                lines.append(f"  [{'PASS' if v else 'FAIL'}] {k}")
        for name, value in self.sections.items():
            _render(lines, name, _plain(value), 0)
        lines.extend(self.summary)
        lines.append(f"status: {'pass' if self.ok else 'fail'}")
        return "\n".join(lines) + "\n"


def _plain(v: Any) -> Any:
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, Scalar):
        return format_scalar(v)
    if isinstance(v, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v)


def _scalar_text(v: Any) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "-"
    return str(v)


def _render(lines: list[str], key: str, value: Any, depth: int) -> None:
    pad = "  " * depth
    if isinstance(value, dict):
        lines.append(f"{pad}{key}:")
        if not value:
            lines.append(f"{pad}  (none)")
        for k, v in value.items():
            _render(lines, k, v, depth + 1)
    elif isinstance(value, list) and any(isinstance(x, (dict, list)) for x in value):
        lines.append(f"{pad}{key}:")
        for x in value:
            if isinstance(x, dict):
                lines.append(f"{pad}  - " + ", ".join(f"{k}={_scalar_text(v)}" for k, v in x.items()))
            else:
                lines.append(f"{pad}  - {x}")
    elif isinstance(value, list):
        if not value:
            lines.append(f"{pad}{key}: (none)")
        elif all(isinstance(x, str) for x in value):
            lines.append(f"{pad}{key}:")
            lines.extend(f"{pad}  {x}" for x in value)
        else:
            lines.append(f"{pad}{key}: " + ", ".join(_scalar_text(x) for x in value))
    else:
        lines.append(f"{pad}{key}: {_scalar_text(value)}")


__all__ = [
    "Report",
    "bidegree_str",
    "class_labels",
    "class_str",
    "compact_element",
    "compact_monomial",
]
