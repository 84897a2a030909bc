"""Declarative family files and the minimal expression grammar.

File format: ``key = value`` lines, ``#`` comments.  Keys:

    dim      = 1                      state dimension
    kind     = general | gradient
    box      = t1min t1max t2min t2max
    sz_edge  = left | right | bottom | top
    fd_step  = 1e-5                   optional
    rhs1 ... rhsN  = expression       one per state component (kind general)
    potential      = expression       (kind gradient)

Expressions use + - * / ^, parentheses, numeric literals and the variables
x1..xn, t1, t2.  ^ is right-associative power; unary minus binds tighter
than * and / but looser than ^.  Evaluation is plain float arithmetic, so it
is deterministic per platform (bit-exactness across platforms not promised).
Derivatives of file families come from finite differences.
"""

from __future__ import annotations

import math
import re
from typing import Callable

import numpy as np

from .errors import FamilyFileError
from .families import EDGES, FamilySpec, ParamBox, gradient_family_from_potential

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class ExprError(ValueError):
    pass


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ExprError(f"bad character {text[pos]!r} at column {pos + 1}")
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    """Recursive descent: sum -> term -> unary -> power -> atom."""

    def __init__(self, tokens, names):
        self.tokens = tokens
        self.pos = 0
        self.names = names

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}, found {val!r}")

    def parse(self):
        node = self.sum_()
        kind, val = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected trailing token {val!r}")
        return node

    def sum_(self):
        node = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                node = ("+", node, rhs) if val == "+" else ("-", node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                node = ("*", node, rhs) if val == "*" else ("/", node, rhs)
            else:
                return node

    def unary(self):
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return ("neg", self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            # right-assoc; exponent may carry its own unary minus
            exponent = self.unary()
            return ("^", base, exponent)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("const", val)
        if kind == "name":
            if val not in self.names:
                raise ExprError(f"unknown variable {val!r}")
            return ("var", self.names[val])
        if kind == "op" and val == "(":
            node = self.sum_()
            self.expect_op(")")
            return node
        raise ExprError(f"unexpected token {val!r}")


def _compile(node) -> Callable[[np.ndarray], float]:
    op = node[0]
    if op == "const":
        c = node[1]
        return lambda env: c
    if op == "var":
        i = node[1]
        return lambda env: env[i]
    if op == "neg":
        f = _compile(node[1])
        return lambda env: -f(env)
    a = _compile(node[1])
    b = _compile(node[2])
    if op == "+":
        return lambda env: a(env) + b(env)
    if op == "-":
        return lambda env: a(env) - b(env)
    if op == "*":
        return lambda env: a(env) * b(env)
    if op == "/":
        return lambda env: a(env) / b(env)
    if op == "^":
        def power(env):
            base = a(env)
            expo = b(env)
            if base < 0 and expo != int(expo):
                return math.nan
            return base ** expo
        return power
    raise ExprError(f"unknown node {op!r}")  # pragma: no cover


def compile_expression(text: str, dim: int) -> Callable[[np.ndarray], float]:
    """Compile one expression to a closure over [x1..xn, t1, t2]."""
    names = {f"x{i + 1}": i for i in range(dim)}
    names["t1"] = dim
    names["t2"] = dim + 1
    tokens = _tokenize(text)
    tree = _Parser(tokens, names).parse()
    return _compile(tree)


def parse_family_text(text: str, name: str = "family-file") -> FamilySpec:
    entries: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FamilyFileError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not value:
            raise FamilyFileError(f"empty value for {key!r}", line=lineno)
        if key in entries:
            raise FamilyFileError(f"duplicate key {key!r}", line=lineno)
        entries[key] = (lineno, value)

    def pop(key, default=None, required=False):
        if key in entries:
            return entries.pop(key)
        if required:
            raise FamilyFileError(f"missing required key {key!r}", line=None)
        return (None, default)

    line_dim, dim_raw = pop("dim", required=True)
    try:
        dim = int(dim_raw)
        if dim < 1:
            raise ValueError
    except ValueError:
        raise FamilyFileError(f"dim must be a positive integer, got {dim_raw!r}",
                              line=line_dim) from None

    line_box, box_raw = pop("box", required=True)
    parts = box_raw.split()
    if len(parts) != 4:
        raise FamilyFileError("box needs 4 numbers: t1min t1max t2min t2max",
                              line=line_box)
    try:
        b = [float(p) for p in parts]
    except ValueError:
        raise FamilyFileError(f"bad box values {box_raw!r}", line=line_box) from None

    line_edge, edge = pop("sz_edge", default="right")
    if edge not in EDGES:
        raise FamilyFileError(f"sz_edge must be one of {EDGES}", line=line_edge)

    line_fd, fd_raw = pop("fd_step", default="1e-5")
    try:
        fd_step = float(fd_raw)
        if fd_step <= 0:
            raise ValueError
    except ValueError:
        raise FamilyFileError(f"fd_step must be a positive real, got {fd_raw!r}",
                              line=line_fd) from None

    _, kind = pop("kind", default="general")
    if kind not in ("general", "gradient"):
        raise FamilyFileError(f"kind must be general or gradient, got {kind!r}",
                              line=None)

    try:
        box = ParamBox(lo=(b[0], b[2]), hi=(b[1], b[3]), sz_edge=edge)
    except ValueError as exc:
        raise FamilyFileError(str(exc), line=line_box) from None

    if kind == "gradient":
        line_pot, pot_raw = pop("potential", required=True)
        if entries:
            extra, (lineno, _) = next(iter(entries.items())), None
            raise FamilyFileError(f"unexpected key {extra[0]!r}", line=extra[1][0])
        try:
            pot_fn = compile_expression(pot_raw, dim)
        except ExprError as exc:
            raise FamilyFileError(f"potential: {exc}", line=line_pot) from None

        def potential(x, theta):
            env = np.concatenate([np.atleast_1d(x), np.asarray(theta, float)])
            return float(pot_fn(env))

        fam = gradient_family_from_potential(potential, box, dim=dim,
                                             fd_step=fd_step, name=name)
        return fam

    comps = []
    for i in range(dim):
        key = f"rhs{i + 1}"
        line_rhs, expr = pop(key, required=True)
        try:
            comps.append(compile_expression(expr, dim))
        except ExprError as exc:
            raise FamilyFileError(f"{key}: {exc}", line=line_rhs) from None
    if entries:
        key, (lineno, _) = next(iter(entries.items()))
        raise FamilyFileError(f"unexpected key {key!r}", line=lineno)

    def rhs(x, theta):
        env = np.concatenate([np.atleast_1d(x), np.asarray(theta, float)])
        return np.array([fn(env) for fn in comps])

    return FamilySpec(dim=dim, box=box, rhs=rhs, fd_step=fd_step,
                      kind="general", name=name)


def parse_family_file(path) -> FamilySpec:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    import os

    return parse_family_text(text, name=os.path.basename(str(path)))
