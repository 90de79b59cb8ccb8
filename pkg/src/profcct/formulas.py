"""User-defined metrics from arithmetic formulas or host callbacks.

The formula grammar is deliberately tiny:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := number | ident | '(' expr ')'

Identifiers name metrics of the target profile; on a diff tree the two
sides are exposed as ``m1`` and ``m2``. Every string either parses or
raises FormulaError with the offending position; there are no partial
parses. Division by zero (and any missing operand) makes the node's
derived value missing rather than failing the whole derivation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence


from . import _kernels
from .errors import CallbackError, FormulaError, UnknownMetric
from .model import (Frame, MetricDescriptor, MetricKind, Profile, Value)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/()]))")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str      # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            bad = len(text) - len(stripped)
            raise FormulaError(f"unexpected character {text[bad]!r}", bad)
        for kind in ("num", "ident", "op"):
            if m.group(kind) is not None:
                out.append(_Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    out.append(_Token("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        ast = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise FormulaError(f"unexpected {tok.text!r}", tok.pos)
        return ast

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = ("bin", op, node, self.factor())
        return node

    def factor(self):
        tok = self.take()
        if tok.kind == "num":
            return ("num", float(tok.text))
        if tok.kind == "ident":
            return ("ref", tok.text, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            closing = self.take()
            if closing.kind != "op" or closing.text != ")":
                raise FormulaError("expected ')'", closing.pos)
            return node
        what = repr(tok.text) if tok.text else "end of formula"
        raise FormulaError(f"expected a number, metric name or '(', got {what}",
                           tok.pos)


@dataclass(frozen=True, slots=True)
class Formula:
    source: str
    ast: tuple

    @property
    def identifiers(self) -> tuple[str, ...]:
        out: list[str] = []

        def walk(node):
            if node[0] == "ref" and node[1] not in out:
                out.append(node[1])
            elif node[0] == "bin":
                walk(node[2])
                walk(node[3])

        walk(self.ast)
        return tuple(out)

    def evaluate(self, env: dict[str, Value]) -> float | None:
        """One node's value; missing inputs and division by zero yield
        a missing result."""

        def walk(node):
            if node[0] == "num":
                return node[1]
            if node[0] == "ref":
                v = env.get(node[1])
                return None if v is None else float(v)
            _, op, lhs, rhs = node
            a = walk(lhs)
            b = walk(rhs)
            if a is None or b is None:
                return None
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            return None if b == 0 else a / b

        return walk(self.ast)


def parse_formula(text: str) -> Formula:
    return Formula(text, _Parser(text).parse())


class MetricContext:
    """What an on_metric callback sees for one node."""

    __slots__ = ("values", "frame", "path")

    def __init__(self, values: dict[str, Value], frame: Frame | None,
                 path: tuple[str, ...]):
        self.values = values
        self.frame = frame
        self.path = path

    @property
    def function_name(self) -> str:
        return self.frame.function_name if self.frame else ""

    @property
    def module_name(self) -> str:
        return self.frame.module_name if self.frame else ""


def _metric_basis(profile: Profile, names: Sequence[str],
                  exclusive: bool) -> dict[str, list]:
    """Per-node input columns; additive metrics contribute inclusive
    subtree sums unless ``exclusive`` is set."""
    basis: dict[str, list] = {}
    parent = profile.parent_array()
    for name in names:
        idx = profile.metric_index(name)
        desc = profile.metrics[idx]
        if desc.kind is MetricKind.ADDITIVE:
            raw = profile.raw_array(idx)
            col = raw if exclusive else _kernels.accumulate_down(parent, raw)
            basis[name] = col.tolist()
        else:
            basis[name] = profile.raw_column(idx)
    return basis


def derive(target, formula: str | Formula | Callable, name: str, *,
           exclusive: bool = False, unit: str = ""):
    """Attach a derived metric to every node of a profile or diff tree.

    ``formula`` is either expression text (see the module grammar), a
    parsed Formula, or a callable receiving a MetricContext. Results are
    floating point, flagged derived, and never re-aggregated. On a diff
    tree the formula sees ``m1``/``m2`` instead of metric names.
    """
    from .multi import DiffTree

    if isinstance(target, DiffTree):
        return _derive_diff(target, formula, name)
    if not isinstance(target, Profile):
        raise TypeError("derive expects a Profile or a DiffTree")

    profile = target
    n = profile.node_count
    if callable(formula) and not isinstance(formula, Formula):
        basis = _metric_basis(profile, [m.name for m in profile.metrics],
                              exclusive)
        column = []
        for node in range(n):
            env = {k: col[node] for k, col in basis.items()}
            ctx = MetricContext(env, profile.node_frame(node),
                                tuple(f.label for f in profile.path_frames(node)))
            try:
                v = formula(ctx)
            except Exception as exc:
                raise CallbackError(f"metric callback failed: {exc}",
                                    ctx.path) from exc
            column.append(None if v is None else float(v))
    else:
        parsed = formula if isinstance(formula, Formula) else parse_formula(formula)
        idents = parsed.identifiers
        for ident in idents:
            profile.metric_index(ident)  # raises UnknownMetric
        basis = _metric_basis(profile, idents, exclusive)
        column = []
        for node in range(n):
            env = {k: col[node] for k, col in basis.items()}
            column.append(parsed.evaluate(env))
    desc = MetricDescriptor(name, unit, MetricKind.DERIVED)
    return profile.with_metric(desc, column)


def _derive_diff(tree, formula, name: str):
    if callable(formula) and not isinstance(formula, Formula):
        raise TypeError("diff derivation takes a formula, not a callback")
    parsed = formula if isinstance(formula, Formula) else parse_formula(formula)
    for ident in parsed.identifiers:
        if ident not in ("m1", "m2"):
            raise UnknownMetric(
                f"diff formulas may only reference m1 and m2, not {ident!r}")
    column = []
    for node in range(tree.size):
        env = {"m1": tree.value1(node), "m2": tree.value2(node)}
        column.append(parsed.evaluate(env))
    return tree.with_derived(name, column)
