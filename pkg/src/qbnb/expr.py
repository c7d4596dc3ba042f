"""Expression trees with symbolic differentiation and compilation to Python.

Nodes are hash-consed: building the same structure twice returns the same
object, so derivative trees share subexpressions and equality is an identity
check. The constructor functions (:func:`add`, :func:`mul`, ...) apply a
conservative simplifier (constant folding and 0/1 identities); this is what
keeps third-derivative trees of the benchmark functions tractable.

Variables are 0-based internally; the text syntax accepted by :func:`parse`
uses ``x1 .. xd``.
"""
from __future__ import annotations

import math
import re
import weakref
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from .errors import ParseError

__all__ = [
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Neg", "IntPow", "Sin", "Cos", "Exp", "Sqrt",
    "const", "var", "variables", "add", "sub", "mul", "div", "neg", "ipow", "sin", "cos", "exp", "sqrt",
    "simplify", "differentiate", "derivative_entries", "evaluate", "lambdify", "parse", "to_text",
    "postorder", "tree_size",
]

_interned: weakref.WeakValueDictionary = weakref.WeakValueDictionary()


class Expr:
    """Base node. Use the constructor functions rather than the classes."""

    __slots__ = ("args", "varmask", "_hash", "__weakref__")
    precedence = 100

    def __new__(cls, *args):
        key = (cls, args)
        node = _interned.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        object.__setattr__(node, "args", args)
        object.__setattr__(node, "varmask", cls._mask(args))
        object.__setattr__(node, "_hash", hash(key))
        _interned[key] = node
        return node

    @staticmethod
    def _mask(args):
        m = 0
        for a in args:
            if isinstance(a, Expr):
                m |= a.varmask
        return m

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        return (type(self), self.args)

    @property
    def children(self) -> tuple[Expr, ...]:
        return tuple(a for a in self.args if isinstance(a, Expr))

    def depends_on(self, i: int) -> bool:
        return bool(self.varmask >> i & 1)

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, n):
        if isinstance(n, Const):
            n = n.value
        if not float(n).is_integer() or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        return ipow(self, int(n))

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"

    def __str__(self):
        return to_text(self)

    def __call__(self, x):
        return evaluate(self, x)


class Const(Expr):
    __slots__ = ()

    def __new__(cls, value):
        return super().__new__(cls, float(value))

    @property
    def value(self) -> float:
        return self.args[0]


class Var(Expr):
    __slots__ = ()

    def __new__(cls, index):
        index = int(index)
        if index < 0:
            raise ValueError("variable index must be >= 0")
        node = super().__new__(cls, index)
        return node

    @staticmethod
    def _mask(args):
        return 1 << args[0]

    @property
    def index(self) -> int:
        return self.args[0]


class Add(Expr):
    __slots__ = ()
    precedence = 1


class Sub(Expr):
    __slots__ = ()
    precedence = 1


class Mul(Expr):
    __slots__ = ()
    precedence = 2


class Div(Expr):
    __slots__ = ()
    precedence = 2


class Neg(Expr):
    __slots__ = ()
    precedence = 3


class IntPow(Expr):
    __slots__ = ()
    precedence = 4

    @property
    def base(self) -> Expr:
        return self.args[0]

    @property
    def exponent(self) -> int:
        return self.args[1]


class Sin(Expr):
    __slots__ = ()


class Cos(Expr):
    __slots__ = ()


class Exp(Expr):
    __slots__ = ()


class Sqrt(Expr):
    __slots__ = ()


UNARY_FUNCS = {Sin: "sin", Cos: "cos", Exp: "exp", Sqrt: "sqrt"}

ZERO = Const(0.0)
ONE = Const(1.0)


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, np.integer, np.floating)):
        return Const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def _is_const(e, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# ---------------------------------------------------------------------------
# simplifying constructors

def const(value) -> Const:
    return Const(value)


def var(index: int) -> Var:
    return Var(index)


def variables(d: int) -> list[Var]:
    return [Var(i) for i in range(d)]


def add(a, b) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return sub(a, b.args[0])
    return Add(a, b)


def sub(a, b) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if a is b:
        return ZERO
    if isinstance(b, Neg):
        return add(a, b.args[0])
    return Sub(a, b)


def mul(a, b) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if isinstance(a, Const):
        if isinstance(b, Const):
            return Const(a.value * b.value)
        if a.value == 0.0:
            return ZERO
        if a.value == 1.0:
            return b
        if a.value == -1.0:
            return neg(b)
        if isinstance(b, Mul) and isinstance(b.args[0], Const):
            return mul(Const(a.value * b.args[0].value), b.args[1])
        if isinstance(b, Neg):
            return mul(Const(-a.value), b.args[0])
    if isinstance(a, Neg) and isinstance(b, Neg):
        return mul(a.args[0], b.args[0])
    if isinstance(a, Neg):
        return neg(mul(a.args[0], b))
    if isinstance(b, Neg):
        return neg(mul(a, b.args[0]))
    return Mul(a, b)


def div(a, b) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if isinstance(b, Const) and b.value != 0.0:
        return mul(Const(1.0 / b.value), a) if math.frexp(b.value)[0] in (0.5, -0.5) else Div(a, b)
    return Div(a, b)


def neg(a) -> Expr:
    a = _coerce(a)
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.args[0]
    if isinstance(a, Mul) and isinstance(a.args[0], Const):
        return mul(Const(-a.args[0].value), a.args[1])
    if isinstance(a, Sub):
        return Sub(a.args[1], a.args[0])
    return Neg(a)


def ipow(a, n: int) -> Expr:
    a = _coerce(a)
    n = int(n)
    if n < 0:
        raise ValueError("IntPow exponent must be >= 0")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value ** n)
    if isinstance(a, IntPow):
        return ipow(a.base, a.exponent * n)
    return IntPow(a, n)


def _unary(cls, fn):
    def build(a):
        if isinstance(a, (int, float)):
            return Const(fn(a))
        a = _coerce(a)
        if isinstance(a, Const):
            return Const(fn(a.value))
        return cls(a)

    build.__name__ = UNARY_FUNCS[cls]
    return build


sin = _unary(Sin, math.sin)
cos = _unary(Cos, math.cos)
exp = _unary(Exp, math.exp)
sqrt = _unary(Sqrt, math.sqrt)

_REBUILD = {
    Add: add, Sub: sub, Mul: mul, Div: div, Neg: neg,
    Sin: sin, Cos: cos, Exp: exp, Sqrt: sqrt,
}


def postorder(roots) -> list[Expr]:
    """Unique nodes reachable from ``roots``, children before parents."""
    if isinstance(roots, Expr):
        roots = [roots]
    seen = set()
    order = []
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for ch in reversed(node.children):
                if id(ch) not in seen:
                    stack.append((ch, False))
    return order


def tree_size(roots) -> int:
    """Number of distinct nodes in the DAG."""
    return len(postorder(roots))


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the simplifying constructors."""
    out = {}
    for node in postorder(e):
        if isinstance(node, (Const, Var)):
            out[node] = node
        elif isinstance(node, IntPow):
            out[node] = ipow(out[node.base], node.exponent)
        else:
            out[node] = _REBUILD[type(node)](*(out[c] for c in node.args))
    return out[e]


# ---------------------------------------------------------------------------
# differentiation

def differentiate(e: Expr, i: int, cache: dict | None = None) -> Expr:
    """Partial derivative of ``e`` with respect to variable ``i`` (0-based)."""
    if cache is None:
        cache = {}
    for node in postorder(e):
        key = (node, i)
        if key in cache:
            continue
        cache[key] = _diff_node(node, i, cache)
    return cache[(e, i)]


def _diff_node(node: Expr, i: int, cache) -> Expr:
    if not node.depends_on(i):
        return ZERO
    if isinstance(node, Var):
        return ONE

    def d(child):
        return cache[(child, i)]

    a = node.args[0]
    if isinstance(node, Add):
        return add(d(a), d(node.args[1]))
    if isinstance(node, Sub):
        return sub(d(a), d(node.args[1]))
    if isinstance(node, Mul):
        b = node.args[1]
        return add(mul(d(a), b), mul(a, d(b)))
    if isinstance(node, Div):
        b = node.args[1]
        return sub(div(d(a), b), div(mul(a, d(b)), ipow(b, 2)))
    if isinstance(node, Neg):
        return neg(d(a))
    if isinstance(node, IntPow):
        n = node.exponent
        return mul(mul(Const(n), ipow(a, n - 1)), d(a))
    if isinstance(node, Sin):
        return mul(cos(a), d(a))
    if isinstance(node, Cos):
        return neg(mul(sin(a), d(a)))
    if isinstance(node, Exp):
        return mul(node, d(a))
    if isinstance(node, Sqrt):
        return div(d(a), mul(Const(2.0), node))
    raise TypeError(f"unknown node {type(node).__name__}")


def derivative_entries(e: Expr, dim: int, order: int, cache: dict | None = None):
    """Distinct partial derivatives of the given order.

    Returns a list of ``(index_tuple, expr, multiplicity)`` where the index
    tuple is non-decreasing and ``multiplicity`` counts how many entries of
    the full ``dim**order`` derivative tensor share that value.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if cache is None:
        cache = {}
    out = []
    for idx in combinations_with_replacement(range(dim), order):
        expr = e
        for j in idx:
            expr = differentiate(expr, j, cache)
        counts = [idx.count(j) for j in set(idx)]
        mult = math.factorial(order)
        for c in counts:
            mult //= math.factorial(c)
        out.append((idx, expr, mult))
    return out


# ---------------------------------------------------------------------------
# compilation

_MATH_NS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}
_NUMPY_NS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}


def _emit(node: Expr, names) -> str:
    a = names[node.args[0]] if isinstance(node.args[0], Expr) else None
    if isinstance(node, Add):
        return f"{a} + {names[node.args[1]]}"
    if isinstance(node, Sub):
        return f"{a} - {names[node.args[1]]}"
    if isinstance(node, Mul):
        return f"{a} * {names[node.args[1]]}"
    if isinstance(node, Div):
        return f"{a} / {names[node.args[1]]}"
    if isinstance(node, Neg):
        return f"-{a}"
    if isinstance(node, IntPow):
        return f"{a} ** {node.exponent}"
    return f"{UNARY_FUNCS[type(node)]}({a})"


def lambdify(exprs: Sequence[Expr] | Expr, backend: str = "math") -> Callable:
    """Compile expressions into one Python function of a point ``x``.

    The generated code is straight-line single-assignment with shared
    subexpressions computed once. With ``backend="numpy"`` the argument may
    be an array of shape ``(d, n)`` and temporaries are released after their
    last use. Returns a tuple when given a sequence, a scalar otherwise.
    """
    single = isinstance(exprs, Expr)
    roots = [exprs] if single else list(exprs)
    order = postorder(roots)
    names = {}
    lines = []
    uses = {}
    for node in order:
        for ch in node.children:
            uses[ch] = uses.get(ch, 0) + 1
    for r in roots:
        uses[r] = uses.get(r, 0) + 1
    numpy_backend = backend == "numpy"
    remaining = dict(uses)
    k = 0
    for node in order:
        if isinstance(node, Const):
            names[node] = f"({node.value!r})"
            continue
        if isinstance(node, Var):
            names[node] = f"x[{node.index}]"
            continue
        lines.append(f"    t{k} = {_emit(node, names)}")
        if numpy_backend:
            dead = []
            for ch in node.children:
                if isinstance(ch, (Const, Var)):
                    continue
                remaining[ch] -= 1
                if remaining[ch] == 0:
                    dead.append(names[ch])
            if dead:
                lines.append(f"    del {', '.join(sorted(set(dead)))}")
        names[node] = f"t{k}"
        k += 1
    ret = ", ".join(names[r] for r in roots)
    lines.append(f"    return ({ret},)")
    src = "def _compiled(x):\n" + "\n".join(lines) + "\n"
    ns = dict(_NUMPY_NS if numpy_backend else _MATH_NS)
    exec(compile(src, "<qbnb.expr>", "exec"), ns)
    fn = ns["_compiled"]
    fn.__doc__ = src
    if single:
        return lambda x: fn(x)[0]
    return fn


def evaluate(e: Expr, x) -> float:
    """Point evaluation with Python floats (slow path, for tests and tools)."""
    vals = {}
    x = [float(v) for v in np.atleast_1d(x)]
    for node in postorder(e):
        if isinstance(node, Const):
            vals[node] = node.value
        elif isinstance(node, Var):
            vals[node] = x[node.index]
        elif isinstance(node, IntPow):
            vals[node] = vals[node.base] ** node.exponent
        else:
            args = [vals[c] for c in node.args]
            if isinstance(node, Add):
                vals[node] = args[0] + args[1]
            elif isinstance(node, Sub):
                vals[node] = args[0] - args[1]
            elif isinstance(node, Mul):
                vals[node] = args[0] * args[1]
            elif isinstance(node, Div):
                vals[node] = args[0] / args[1]
            elif isinstance(node, Neg):
                vals[node] = -args[0]
            else:
                vals[node] = _MATH_NS[UNARY_FUNCS[type(node)]](args[0])
    return vals[e]


# ---------------------------------------------------------------------------
# text form

def to_text(e: Expr) -> str:
    """Render in the syntax accepted by :func:`parse` (1-based variables)."""
    text = {}
    for node in postorder(e):
        if isinstance(node, Const):
            v = node.value
            s = repr(v) if not v.is_integer() or abs(v) >= 1e16 else str(int(v))
            text[node] = (s, 0 if v < 0 else 100)
        elif isinstance(node, Var):
            text[node] = (f"x{node.index + 1}", 100)
        elif type(node) in UNARY_FUNCS:
            text[node] = (f"{UNARY_FUNCS[type(node)]}({text[node.args[0]][0]})", 100)
        elif isinstance(node, Neg):
            s, p = text[node.args[0]]
            text[node] = ("-" + (s if p > node.precedence else f"({s})"), node.precedence)
        elif isinstance(node, IntPow):
            s, p = text[node.base]
            text[node] = ((s if p > node.precedence else f"({s})") + f"^{node.exponent}", node.precedence)
        else:
            sym = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
            (ls, lp), (rs, rp) = text[node.args[0]], text[node.args[1]]
            left = ls if lp >= node.precedence else f"({ls})"
            # right operand of - and / needs parentheses at equal precedence
            strict = isinstance(node, (Sub, Div))
            right = rs if rp > node.precedence or (rp == node.precedence and not strict) else f"({rs})"
            text[node] = (f"{left} {sym} {right}", node.precedence)
    return text[e][0]


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))"
)
_FUNCS = {"sin": sin, "cos": cos, "exp": exp, "sqrt": sqrt}


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} at position {pos}")
        kind = m.lastgroup
        val = m.group(kind)
        tokens.append((kind, "^" if val == "**" else val, m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.dim = dim

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None, -1)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise ParseError("unexpected end of expression")
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r} at position {tok[2]}, found {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty expression")
        e = self.expr()
        if self.pos != len(self.tokens):
            tok = self.peek()
            raise ParseError(f"unexpected {tok[1]!r} at position {tok[2]}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            exponent = self.unary()
            if not isinstance(exponent, Const) or not exponent.value.is_integer() or exponent.value < 0:
                raise ParseError(f"exponent at position {tok[2]} must be a non-negative integer constant")
            return ipow(base, int(exponent.value))
        return base

    def atom(self):
        kind, val, at = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "pi":
                return Const(math.pi)
            if val in _FUNCS:
                self.take("(")
                inner = self.expr()
                self.take(")")
                return _FUNCS[val](inner)
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                i = int(m.group(1))
                if i < 1 or (self.dim is not None and i > self.dim):
                    raise ParseError(f"variable {val} out of range")
                return Var(i - 1)
            raise ParseError(f"unknown name {val!r} at position {at}")
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ParseError(f"unexpected {val!r} at position {at}")


def parse(text: str, dim: int | None = None) -> Expr:
    """Parse infix text: numbers, ``pi``, ``x1..xd``, ``+ - * / ^``,
    ``sin cos exp sqrt`` and parentheses. ``^`` takes a non-negative integer."""
    return _Parser(text, dim).parse()
