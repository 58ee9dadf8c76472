"""Presentation files and the element / operator expression languages.

A presentation file is a small subset of TOML::

    [algebra]
    name = "kt"
    generators = [["a", 1, 0], ["b", 1, 0], ["abar", 0, 1], ["bbar", 0, 1]]
    conjugation = [["a", "abar"], ["b", "bbar"]]

    [differential.dbar]
    b = "i * a ^ abar"

    [bv]
    d = "dbar"
    delta = "del"

Element expressions: ``^`` is the wedge product and binds tightest, ``*``
multiplies by a scalar, ``+``/``-`` bind loosest.  Scalars are rationals,
``i`` and rationals with a trailing ``i`` (``2i``, ``1/2i``); a parenthesised
multiple of 1 such as ``(1+i)`` is also accepted as a scalar factor.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .cdga import Algebra, Element, Operator, Presentation
from .exactlin import I, ONE, Scalar


class ParseError(ValueError):
    """Diagnostic with a kind, a 1-based position and the offending token."""

    def __init__(self, kind: str, message: str, line: int = 0, col: int = 0, token: str = ""):
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col
        self.token = token
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f"line {self.line}, column {self.col}: " if self.line else (f"column {self.col}: " if self.col else "")
        tok = f" (at {self.token!r})" if self.token else ""
        return f"{where}{self.kind} error: {self.message}{tok}"

    def shifted(self, line: int, col_offset: int) -> "ParseError":
        return ParseError(self.kind, self.message, line, self.col + col_offset, self.token)


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?i?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | end
    text: str
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError("lexical", "unexpected character", col=start + 1, token=text[start])
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), start + 1))
        pos = m.end()
    out.append(Token("end", "", len(text) + 1))
    return out


def _number(text: str) -> Scalar:
    imag = text.endswith("i")
    val = Fraction(text[:-1] if imag else text)
    return Scalar(0, val) if imag else Scalar(val)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def take(self) -> Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.k += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            t = self.tok
            raise ParseError("syntax", f"expected {text!r}", col=t.col, token=t.text or "<end>")

    def finish(self) -> None:
        if self.tok.kind != "end":
            raise ParseError("syntax", "unexpected trailing input", col=self.tok.col, token=self.tok.text)

    def is_scalar_start(self) -> bool:
        t = self.tok
        return t.kind == "num" or (t.kind == "name" and t.text == "i")

    def scalar_atom(self) -> Scalar:
        t = self.take()
        if t.kind == "num":
            return _number(t.text)
        return I


def _unit_multiple(x: Element) -> Scalar | None:
    if not x.terms:
        return Scalar(0)
    if set(x.terms) == {0}:
        return x.terms[0]
    return None


class ElementParser(_Parser):
    def __init__(self, text: str, alg: Algebra):
        super().__init__(text)
        self.alg = alg
        self.warnings: list[str] = []

    def parse(self) -> Element:
        if self.tok.kind == "end":
            raise ParseError("syntax", "empty expression", col=1, token="<end>")
        e = self.expr()
        self.finish()
        return e

    def expr(self) -> Element:
        neg = False
        if self.tok.kind == "op" and self.tok.text in "+-":
            neg = self.take().text == "-"
        acc = self.term()
        if neg:
            acc = -acc
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        factors = [self.unit()]
        while self.accept("*"):
            factors.append(self.unit())
        acc: Scalar | Element = factors[0]
        for f in factors[1:]:
            if isinstance(f, Scalar):
                acc = acc * f if isinstance(acc, Scalar) else acc.scale(f)
            elif isinstance(acc, Scalar):
                acc = f.scale(acc)
            elif _unit_multiple(acc) is not None:
                # a parenthesised scalar such as (1+i) parses as a multiple of 1
                acc = f.scale(_unit_multiple(acc))
            elif _unit_multiple(f) is not None:
                acc = acc.scale(_unit_multiple(f))
            else:
                raise ParseError("syntax", "'*' needs a scalar operand; use '^' for the wedge product", col=self.tok.col)
        if isinstance(acc, Scalar):
            return self.alg.one().scale(acc)
        return acc

    def unit(self):
        if self.is_scalar_start():
            return self.scalar_atom()
        return self.wedge()

    def wedge(self) -> Element:
        start = self.tok
        names: list[str] = []
        acc = self.atom(names)
        while self.accept("^"):
            acc = acc ^ self.atom(names)
        plain = [n for n in names if n]
        if len(plain) != len(set(plain)):
            rep = next(n for n in plain if plain.count(n) > 1)
            self.warnings.append(f"column {start.col}: odd generator {rep} squared; term is zero")
        return acc

    def atom(self, names: list[str]) -> Element:
        t = self.tok
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            names.append("")
            return e
        if t.kind == "name":
            self.take()
            if t.text == "i":
                raise ParseError("syntax", "scalar i cannot be a wedge factor", col=t.col, token=t.text)
            try:
                idx = self.alg.presentation.index(t.text)
            except ValueError:
                raise ParseError("undeclared", f"unknown generator {t.text!r}", col=t.col, token=t.text) from None
            names.append(t.text)
            return Element(self.alg, {1 << idx: ONE})
        raise ParseError("syntax", "expected a generator, scalar or '('", col=t.col, token=t.text or "<end>")


def parse_element(text: str, alg: Algebra, warnings: list[str] | None = None) -> Element:
    p = ElementParser(text, alg)
    e = p.parse()
    if warnings is not None:
        warnings.extend(p.warnings)
    return e


class OperatorParser(_Parser):
    """opexpr := ['+'|'-'] opterm (('+'|'-') opterm)*;
    opterm := (scalar '*')* opatom;  opatom := name | 0 | fn '(' opexpr ')' | '(' opexpr ')'."""

    FUNCTIONS = ("adj", "star_adj", "conj")

    def __init__(self, text: str, resolve: Callable[[str], Operator], funcs: Mapping[str, Callable[[Operator], Operator]], zero: Operator):
        super().__init__(text)
        self.resolve = resolve
        self.funcs = funcs
        self.zero = zero

    def parse(self) -> Operator:
        if self.tok.kind == "end":
            raise ParseError("syntax", "empty operator expression", col=1, token="<end>")
        op = self.expr()
        self.finish()
        return op

    def expr(self) -> Operator:
        neg = False
        if self.tok.kind == "op" and self.tok.text in "+-":
            neg = self.take().text == "-"
        acc = self.term()
        if neg:
            acc = -acc
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Operator:
        c = ONE
        scaled = False
        while self.is_scalar_start() and not (self.tok.kind == "num" and self.tok.text == "0"):
            c = c * self.scalar_atom()
            scaled = True
            self.expect("*")
        op = self.atom()
        return c * op if scaled else op

    def atom(self) -> Operator:
        t = self.tok
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "num" and t.text == "0":
            self.take()
            return self.zero
        if t.kind == "name":
            self.take()
            if t.text in self.funcs and self.tok.kind == "op" and self.tok.text == "(":
                self.take()
                inner = self.expr()
                self.expect(")")
                return self.funcs[t.text](inner)
            try:
                return self.resolve(t.text)
            except KeyError:
                raise ParseError("undeclared", f"unknown operator {t.text!r}", col=t.col, token=t.text) from None
        raise ParseError("syntax", "expected an operator name, adj(...) or '('", col=t.col, token=t.text or "<end>")


def parse_operator(text: str, operators: Mapping[str, Operator], alg: Algebra) -> Operator:
    from .hodge import star_adjoint
    from .cdga import conjugate_operator

    def resolve(name: str) -> Operator:
        return operators[name]

    funcs = {"adj": lambda o: o.adjoint(), "star_adj": star_adjoint, "conj": conjugate_operator}
    op = OperatorParser(text, resolve, funcs, Operator.zero(alg)).parse()
    op.name = text.strip()
    return op


# -- presentation files ------------------------------------------------------


@dataclass
class PresentationFile:
    name: str
    generators: list[tuple[str, int, int]]
    conjugation: list[tuple[str, str]] = field(default_factory=list)
    complex_dimension: int | None = None
    volume: list[str] | None = None
    differentials: dict[str, dict[str, str]] = field(default_factory=dict)
    bv: dict[str, str] = field(default_factory=dict)
    invariants: dict | None = None
    # 1-based (line, column of the value) per key, for diagnostics
    positions: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict, compare=False, repr=False)

    def presentation(self) -> Presentation:
        from .cdga import Generator, GradingError, PresentationError

        try:
            gens = [Generator(n, p, q) for n, p, q in self.generators]
            return Presentation(
                gens,
                dict(self.conjugation) if self.conjugation else None,
                self.complex_dimension,
                self.volume,
                self.name,
            )
        except GradingError as exc:
            line, col = self.positions.get(("algebra", "generators"), (0, 0))
            raise ParseError("bidegree", str(exc), line, col) from None
        except PresentationError as exc:
            line, col = self.positions.get(("algebra", "conjugation"), (0, 0))
            raise ParseError("undeclared", str(exc), line, col) from None


_SECTION = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_.]*)\s*\]\s*$")
_TRAILING_COMMA = re.compile(r",(\s*)\]")
_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*")


def _strip_comment(line: str) -> str:
    out, inq = [], False
    for ch in line:
        if ch == '"':
            inq = not inq
        if ch == "#" and not inq:
            break
        out.append(ch)
    return "".join(out).rstrip()


def _parse_value(raw: str, line: int, col: int):
    raw = raw.strip()
    if raw.startswith('"'):
        try:
            val, end = json.JSONDecoder().raw_decode(raw)
        except json.JSONDecodeError as exc:
            raise ParseError("lexical", "malformed string", line, col + exc.pos, raw[exc.pos: exc.pos + 1]) from None
        if raw[end:].strip():
            raise ParseError("syntax", "unexpected text after value", line, col + end, raw[end:].strip()[:1])
        return val
    if raw.startswith("["):
        # TOML allows a trailing comma before a closing bracket; blank it out, keeping offsets
        raw = _TRAILING_COMMA.sub(lambda m: " " + m.group(1) + "]", raw)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            sub = raw[: exc.pos]
            ln = line + sub.count("\n")
            cl = (len(sub) - sub.rfind("\n")) if "\n" in sub else col + exc.pos
            raise ParseError("syntax", f"malformed array ({exc.msg})", ln, cl, raw[exc.pos: exc.pos + 1]) from None
    if re.fullmatch(r"-?\d+", raw):
        return int(raw)
    raise ParseError("syntax", "expected a string, integer or array", line, col, raw[:1])


def parse_presentation(text: str) -> PresentationFile:
    section: str | None = None
    data: dict[str, dict[str, object]] = {}
    pos: dict[tuple[str, str], tuple[int, int]] = {}
    lines = text.splitlines()
    k = 0
    while k < len(lines):
        lineno = k + 1
        line = _strip_comment(lines[k])
        k += 1
        if not line.strip():
            continue
        m = _SECTION.match(line.strip())
        if m:
            section = m.group(1)
            if section in data:
                raise ParseError("syntax", f"duplicate section [{section}]", lineno, 1, section)
            data[section] = {}
            pos[(section, "")] = (lineno, 1)
            continue
        if line.lstrip().startswith("["):
            raise ParseError("syntax", "malformed section header", lineno, 1, line.strip()[:1])
        indent = len(line) - len(line.lstrip())
        m = _KEY.match(line.lstrip())
        if not m:
            raise ParseError("syntax", "expected 'key = value'", lineno, indent + 1, line.strip().split()[0])
        if section is None:
            raise ParseError("syntax", "key outside of any section", lineno, indent + 1, m.group(1))
        key = m.group(1)
        vcol = indent + m.end() + 1
        raw = line.lstrip()[m.end():]
        if raw.strip().startswith("["):
            while raw.count("[") > raw.count("]") and k < len(lines):
                raw += "\n" + _strip_comment(lines[k])
                k += 1
        if key in data[section]:
            raise ParseError("syntax", f"duplicate key {key!r}", lineno, indent + 1, key)
        data[section][key] = _parse_value(raw, lineno, vcol)
        pos[(section, key)] = (lineno, vcol)
    return _to_file(data, pos)


def _want(cond: bool, msg: str, pos, sec: str, key: str, kind: str = "syntax") -> None:
    if not cond:
        line, col = pos.get((sec, key), (0, 0))
        raise ParseError(kind, msg, line, col, key)


def _to_file(data: dict, pos: dict) -> PresentationFile:
    alg = data.get("algebra")
    if alg is None:
        raise ParseError("syntax", "missing [algebra] section", 1, 1)
    for key in alg:
        _want(key in ("name", "generators", "conjugation", "complex_dimension", "volume"), f"unknown key {key!r} in [algebra]", pos, "algebra", key)
    gens = alg.get("generators")
    if gens is None:
        raise ParseError("syntax", "[algebra] needs generators", 1, 1)
    ok = isinstance(gens, list) and all(
        isinstance(g, list) and len(g) == 3 and isinstance(g[0], str) and all(isinstance(x, int) for x in g[1:]) for g in gens
    )
    _want(ok, "generators must be [[name, p, q], ...]", pos, "algebra", "generators")
    for g in gens:
        _want((g[1], g[2]) in ((1, 0), (0, 1)), f"generator {g[0]!r} has bidegree ({g[1]},{g[2]}); only (1,0) and (0,1) are supported", pos, "algebra", "generators", "bidegree")
        _want(g[0] != "i", "'i' is reserved for the imaginary unit", pos, "algebra", "generators")
    names = {g[0] for g in gens}
    conj = alg.get("conjugation", [])
    _want(isinstance(conj, list) and all(isinstance(c, list) and len(c) == 2 for c in conj), "conjugation must be [[x, xbar], ...]", pos, "algebra", "conjugation")
    for x, y in conj:
        _want(x in names and y in names, f"conjugation names an undeclared generator ({x}, {y})", pos, "algebra", "conjugation", "undeclared")
    vol = alg.get("volume")
    if vol is not None:
        _want(isinstance(vol, list) and all(v in names for v in vol), "volume must list declared generators", pos, "algebra", "volume", "undeclared")
    cd = alg.get("complex_dimension")
    _want(cd is None or isinstance(cd, int), "complex_dimension must be an integer", pos, "algebra", "complex_dimension")
    pf = PresentationFile(
        name=str(alg.get("name", "")),
        generators=[(g[0], g[1], g[2]) for g in gens],
        conjugation=[(c[0], c[1]) for c in conj],
        complex_dimension=cd,
        volume=list(vol) if vol is not None else None,
        positions=pos,
    )
    for sec, body in data.items():
        if sec == "algebra":
            continue
        if sec.startswith("differential."):
            dname = sec.split(".", 1)[1]
            diff = {}
            for key, val in body.items():
                _want(key in names, f"unknown generator {key!r} in [{sec}]", pos, sec, key, "undeclared")
                _want(isinstance(val, str), "differential values must be quoted expressions", pos, sec, key)
                diff[key] = val
            pf.differentials[dname] = diff
        elif sec == "bv":
            for key, val in body.items():
                _want(key in ("d", "delta"), f"unknown key {key!r} in [bv]", pos, sec, key)
                _want(isinstance(val, str), "operator expressions must be quoted", pos, sec, key)
            pf.bv = {k: body[k] for k in ("d", "delta") if k in body}
        elif sec == "invariants":
            w = body.get("weights")
            order = body.get("order")
            _want(isinstance(order, int) and order > 0, "order must be a positive integer", pos, sec, "order")
            _want(isinstance(w, list) and all(isinstance(x, list) and len(x) == 2 and x[0] in names for x in w), "weights must be [[generator, weight], ...]", pos, sec, "weights")
            pf.invariants = {"order": order, "weights": [(x[0], int(x[1])) for x in w]}
        else:
            line, col = pos.get((sec, ""), (0, 0))
            raise ParseError("syntax", f"unknown section [{sec}]", line, col, sec)
    return pf


def serialize(pf: PresentationFile) -> str:
    q = json.dumps
    out = ["[algebra]"]
    if pf.name:
        out.append(f"name = {q(pf.name)}")
    out.append("generators = [" + ", ".join(f"[{q(n)}, {p}, {r}]" for n, p, r in pf.generators) + "]")
    if pf.conjugation:
        out.append("conjugation = [" + ", ".join(f"[{q(x)}, {q(y)}]" for x, y in pf.conjugation) + "]")
    if pf.complex_dimension is not None:
        out.append(f"complex_dimension = {pf.complex_dimension}")
    if pf.volume is not None:
        out.append("volume = [" + ", ".join(q(v) for v in pf.volume) + "]")
    if pf.invariants:
        out += ["", "[invariants]", f"order = {pf.invariants['order']}"]
        out.append("weights = [" + ", ".join(f"[{q(n)}, {w}]" for n, w in pf.invariants["weights"]) + "]")
    for dname, body in pf.differentials.items():
        out += ["", f"[differential.{dname}]"]
        out += [f"{g} = {q(e)}" for g, e in body.items()]
    if pf.bv:
        out += ["", "[bv]"]
        out += [f"{k} = {q(v)}" for k, v in pf.bv.items()]
    return "\n".join(out) + "\n"


def element_in(pf: PresentationFile, section: str, key: str, alg: Algebra, warnings: list[str]) -> Element:
    """Parse the expression stored under (section, key), mapping errors to file positions."""
    text = pf.differentials[section.split(".", 1)[1]][key]
    line, col = pf.positions.get((section, key), (0, 0))
    try:
        local: list[str] = []
        e = parse_element(text, alg, local)
    except ParseError as exc:
        raise exc.shifted(line, col) from None
    warnings.extend(f"line {line}, {w}" for w in local)
    return e


__all__ = [
    "ParseError",
    "PresentationFile",
    "element_in",
    "parse_element",
    "parse_operator",
    "parse_presentation",
    "serialize",
]
