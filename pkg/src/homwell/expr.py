"""A tiny expression language for user-supplied fields and potentials.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?              # right-associative, binds tighter than unary minus
    atom    := NUMBER | 'pi' | NAME | FUNC '(' expr ')' | 'norm' '(' 'q' ')' | '(' expr ')'

``FUNC`` is one of sin, cos, exp. Torus fields use the variables x, y;
potentials use q1..qm and norm(q) = |q|.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParseError",
    "EvaluationError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Norm",
    "parse_expression",
    "evaluate",
    "differentiate",
    "simplify",
    "variables",
    "to_source",
    "torus_function",
    "potential_from_expression",
    "TORUS_VARS",
]

FUNCS = ("sin", "cos", "exp")
TORUS_VARS = ("x", "y")


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.reason = message


class EvaluationError(ValueError):
    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = -1


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = -1


@dataclass(frozen=True)
class Neg:
    arg: object
    pos: int = -1


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = -1


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    pos: int = -1


@dataclass(frozen=True)
class Norm:
    """|q|, the Euclidean norm of the position vector."""

    pos: int = -1


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))")


def _tokenize(src):
    toks = []
    i = 0
    n = len(src)
    while i < n:
        if src[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(src, i)
        if not m or m.end() == i:
            raise ParseError(f"unexpected character {src[i]!r}", i)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        i = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, src, allowed):
        self.toks = _tokenize(src)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            what = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {what}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self):
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary(), pos)
        if kind == "op" and text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.unary(), pos)
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text), pos)
        if kind == "name":
            if text == "pi":
                return Num(math.pi, pos)
            if text in FUNCS or text == "norm":
                self.expect("(")
                if text == "norm":
                    k2, t2, p2 = self.take()
                    if t2 != "q":
                        raise ParseError("norm() only accepts the argument q", p2)
                    if "q" not in self.allowed:
                        raise ParseError("norm(q) is only available in potentials", pos)
                    node = Norm(pos)
                else:
                    node = Call(text, self.expr(), pos)
                k3, t3, p3 = self.peek()
                if t3 == ",":
                    raise ParseError(f"{text}() takes exactly one argument", p3)
                self.expect(")")
                return node
            if not self._allowed(text):
                raise ParseError(f"unknown identifier {text!r}", pos)
            k2, t2, _ = self.peek()
            if t2 == "(":
                raise ParseError(f"unknown function {text!r}", pos)
            return Var(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {text!r}", pos)

    def _allowed(self, name):
        if self.allowed is None:
            return True
        if name in self.allowed:
            return True
        return "q" in self.allowed and re.fullmatch(r"q[1-9]\d*", name) is not None


def parse_expression(src: str, domain: str | None = None):
    """Parse ``src`` into an AST.

    ``domain`` is ``"torus"`` (variables x, y), ``"potential"`` (q1..qm and
    norm(q)) or ``None`` (any identifier accepted as a variable).
    """
    allowed = {"torus": set(TORUS_VARS), "potential": {"q"}, None: None}[domain]
    return _Parser(src, allowed).parse()


def variables(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Norm):
        return {"norm(q)"}
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return set()


def evaluate(node, env):
    """Evaluate with numpy semantics. ``env`` maps names to scalars or arrays;
    ``Norm`` reads ``env['norm(q)']``.

    Non-finite results raise :class:`EvaluationError` naming the offending node.
    """
    with np.errstate(all="ignore"):
        out = _eval(node, env)
    return out


def _check(val, node, what):
    if not np.all(np.isfinite(val)):
        raise EvaluationError(f"{what} produced a non-finite value", node.pos)
    return val


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvaluationError(f"no value for variable {node.name!r}", node.pos) from None
    if isinstance(node, Norm):
        return env["norm(q)"]
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Call):
        a = _eval(node.arg, env)
        return _check(getattr(np, node.func)(a), node, node.func)
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(np.asarray(b) == 0):
            raise EvaluationError("division by zero", node.pos)
        return _check(a / b, node, "division")
    return _check(np.power(np.asarray(a, float), b), node, "power")


def to_source(node):
    """Fully parenthesized source text that parses back to an equal tree (up to positions)."""
    if isinstance(node, Num):
        return repr(float(node.value)) if node.value >= 0 else f"(-{repr(-float(node.value))})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Norm):
        return "norm(q)"
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    return f"({to_source(node.left)}{node.op}{to_source(node.right)})"


# -- symbolic derivative (potentials only) -----------------------------------------------


def _is_num(node, v=None):
    return isinstance(node, Num) and (v is None or node.value == v)


def simplify(node):
    """Constant folding and the obvious 0/1 identities."""
    if isinstance(node, Neg):
        a = simplify(node.arg)
        if _is_num(a):
            return Num(-a.value)
        return Neg(a)
    if isinstance(node, Call):
        a = simplify(node.arg)
        if _is_num(a):
            return Num(float(getattr(math, node.func)(a.value)))
        return Call(node.func, a, node.pos)
    if not isinstance(node, BinOp):
        return node
    a, b = simplify(node.left), simplify(node.right)
    op = node.op
    if _is_num(a) and _is_num(b) and not (op == "/" and b.value == 0) and not (op == "^" and a.value < 0):
        with np.errstate(all="ignore"):
            v = {"+": a.value + b.value, "-": a.value - b.value, "*": a.value * b.value,
                 "/": a.value / b.value if op == "/" else 0.0, "^": a.value ** b.value if op == "^" else 0.0}[op]
        if math.isfinite(v):
            return Num(v)
    if op == "+":
        if _is_num(a, 0):
            return b
        if _is_num(b, 0):
            return a
    if op == "-":
        if _is_num(b, 0):
            return a
        if _is_num(a, 0):
            return Neg(b)
    if op == "*":
        if _is_num(a, 0) or _is_num(b, 0):
            return Num(0.0)
        if _is_num(a, 1):
            return b
        if _is_num(b, 1):
            return a
    if op == "/" and _is_num(b, 1):
        return a
    if op == "^" and _is_num(b, 1):
        return a
    if op == "^" and _is_num(b, 0):
        return Num(1.0)
    return BinOp(op, a, b, node.pos)


def _depends(node, name):
    v = variables(node)
    return name in v or (name.startswith("q") and "norm(q)" in v)


def differentiate(node, name):
    """d node / d name for a potential variable q_i (norm(q) handled)."""
    return simplify(_diff(node, name))


def _diff(node, name):
    if not _depends(node, name):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0)
    if isinstance(node, Norm):
        # d|q|/dq_i = q_i / |q|
        return BinOp("/", Var(name), Norm())
    if isinstance(node, Neg):
        return Neg(_diff(node.arg, name))
    if isinstance(node, Call):
        inner = _diff(node.arg, name)
        if node.func == "sin":
            outer = Call("cos", node.arg)
        elif node.func == "cos":
            outer = Neg(Call("sin", node.arg))
        else:
            outer = Call("exp", node.arg)
        return BinOp("*", outer, inner)
    a, b = node.left, node.right
    da, db = _diff(a, name), _diff(b, name)
    if node.op in "+-":
        return BinOp(node.op, da, db)
    if node.op == "*":
        return BinOp("+", BinOp("*", da, b), BinOp("*", a, db))
    if node.op == "/":
        return BinOp("/", BinOp("-", BinOp("*", da, b), BinOp("*", a, db)), BinOp("^", b, Num(2.0)))
    # power
    if not _depends(b, name):
        return BinOp("*", BinOp("*", b, BinOp("^", a, BinOp("-", b, Num(1.0)))), da)
    # a^b = exp(b log a); log is not in the language, so require a constant base
    if _depends(a, name):
        raise EvaluationError("variable exponent with variable base is not supported", node.pos)
    if not _is_num(a) or a.value <= 0:
        raise EvaluationError("variable exponent needs a positive constant base", node.pos)
    return BinOp("*", BinOp("*", node, Num(math.log(a.value))), db)


# -- adapters ----------------------------------------------------------------------------


def torus_function(src: str):
    """Parse a torus expression into a callable ``f(x, y)`` (broadcasting)."""
    node = parse_expression(src, "torus")

    def f(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.broadcast_to(np.asarray(evaluate(node, {"x": x, "y": y}), float), x.shape)

    f.source = src
    f.ast = node
    return f


def _potential_dimension(node):
    idx = [int(v[1:]) for v in variables(node) if re.fullmatch(r"q\d+", v)]
    return max(idx, default=0)


def potential_from_expression(src: str, dimension: int | None = None, degree=None, epsilon=None):
    """Build a closed-form :class:`~homwell.potential.Potential` with a symbolic gradient."""
    from .potential import DEFAULT_EPSILON, closed_form

    node = parse_expression(src, "potential")
    m = max(_potential_dimension(node), dimension or 0, 1)
    grads = [differentiate(node, f"q{i + 1}") for i in range(m)]

    def env(x):
        x = np.asarray(x, float)
        if x.shape[-1] != m:
            raise ValueError(f"expected points of dimension {m}, got {x.shape[-1]}")
        e = {f"q{i + 1}": x[..., i] for i in range(m)}
        e["norm(q)"] = np.linalg.norm(x, axis=-1)
        return x, e

    def V(x):
        x, e = env(x)
        return np.broadcast_to(np.asarray(evaluate(node, e), float), x.shape[:-1]).copy()

    def grad(x):
        x, e = env(x)
        return np.stack([np.broadcast_to(np.asarray(evaluate(g, e), float), x.shape[:-1]) for g in grads], axis=-1)

    return closed_form(m, V, grad, degree, epsilon or DEFAULT_EPSILON, src)
