"""Edge potential mini-language: parsing, printing, evaluation, integration.

A potential on an edge of length L is one of

* ``Constant(value)``
* ``Expression(text)`` over the grammar below, with ``x`` the edge-local
  coordinate in [0, L]
* ``Samples(values)``, uniformly spaced over [0, L] including both ends,
  interpolated by a monotone-limited cubic Hermite (PCHIP slopes)

Grammar (ASCII only, whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | 'x' | 'pi' | ident '(' expr ')' | '(' expr ')'
    ident  := 'sin' | 'cos' | 'exp' | 'sqrt' | 'abs'

'^' is right-associative and binds tighter than unary minus, so
``-x^2`` parses as ``-(x^2)`` while exponents may carry their own sign
(``x^-2``).  Numbers are unsigned decimals with optional fraction and
exponent part.
"""

import math
import re

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels
from .errors import (DomainError, ExpressionSyntaxError, PotentialError,
                     UnknownFunction, UnknownIdentifier)
from .quadrature import integrate

__all__ = [
    "Num", "Var", "Pi", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "Potential", "Constant", "Expression", "Samples",
    "parse", "to_string", "evaluate", "integrate_edge", "sup_norm_estimate",
    "scale_potential", "offset_potential", "reflect_potential",
    "potential_from_json", "potential_to_json",
]

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")


# ---------------------------------------------------------------------------
# AST


class _Node:
    __slots__ = ()

    def __eq__(self, other):
        return (type(self) is type(other)
                and all(getattr(self, f) == getattr(other, f)
                        for f in self._fields))

    def __hash__(self):
        return hash((type(self).__name__,)
                    + tuple(getattr(self, f) for f in self._fields))

    def __repr__(self):
        args = ", ".join(repr(getattr(self, f)) for f in self._fields)
        return "%s(%s)" % (type(self).__name__, args)


class Num(_Node):
    __slots__ = ("value",)
    _fields = ("value",)

    def __init__(self, value):
        self.value = float(value)


class Var(_Node):
    __slots__ = ()
    _fields = ()


class Pi(_Node):
    __slots__ = ()
    _fields = ()


class Neg(_Node):
    __slots__ = ("operand",)
    _fields = ("operand",)

    def __init__(self, operand):
        self.operand = operand


class _Binary(_Node):
    __slots__ = ("left", "right")
    _fields = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Pow(_Binary):
    __slots__ = ()


class Call(_Node):
    __slots__ = ("func", "arg")
    _fields = ("func", "arg")

    def __init__(self, func, arg):
        if func not in FUNCTIONS:
            raise UnknownFunction("unknown function %r" % func)
        self.func = func
        self.arg = arg


# ---------------------------------------------------------------------------
# Lexer / parser

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[a-z]+)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _lex(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(
                "unexpected character %r" % text[pos], position=pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _lex(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ExpressionSyntaxError(
                "expected %r, found %r" % (op, text or "end of input"),
                position=pos)
        return self.take()

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(
                "trailing input %r" % text, position=pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                rhs = self.term()
                node = Add(node, rhs) if text == "+" else Sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                rhs = self.factor()
                node = Mul(node, rhs) if text == "*" else Div(node, rhs)
            else:
                return node

    def factor(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Pow(base, self.factor())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "number":
            return Num(float(text))
        if kind == "ident":
            if text == "x":
                return Var()
            if text == "pi":
                return Pi()
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "(":
                if text not in FUNCTIONS:
                    raise UnknownFunction(
                        "unknown function %r" % text, position=pos)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise UnknownIdentifier(
                "unknown identifier %r" % text, position=pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError(
            "unexpected %r" % (text or "end of input"), position=pos)


def parse(text):
    """Parse an expression string into an AST."""
    if not isinstance(text, str):
        raise ExpressionSyntaxError("expression must be a string")
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer

_P_ADD, _P_MUL, _P_UNARY, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _fmt_number(v):
    if v != v or v in (float("inf"), float("-inf")):
        raise PotentialError("cannot print non-finite literal")
    if v < 0:
        # printed form re-parses as Neg(Num(-v)): value-equal, and parser
        # output never contains negative literals so structural round-trip
        # is unaffected
        return "(-" + _fmt_number(-v) + ")"
    if v == int(v) and abs(v) < 1e16:
        return repr(int(v))
    return repr(v)


def _print(node, ctx):
    if isinstance(node, Num):
        text, level = _fmt_number(node.value), _P_ATOM
    elif isinstance(node, Var):
        text, level = "x", _P_ATOM
    elif isinstance(node, Pi):
        text, level = "pi", _P_ATOM
    elif isinstance(node, Neg):
        text, level = "-" + _print(node.operand, _P_UNARY), _P_UNARY
    elif isinstance(node, Add):
        text = _print(node.left, _P_ADD) + " + " + _print(node.right, _P_MUL)
        level = _P_ADD
    elif isinstance(node, Sub):
        text = _print(node.left, _P_ADD) + " - " + _print(node.right, _P_MUL)
        level = _P_ADD
    elif isinstance(node, Mul):
        text = _print(node.left, _P_MUL) + "*" + _print(node.right, _P_UNARY)
        level = _P_MUL
    elif isinstance(node, Div):
        text = _print(node.left, _P_MUL) + "/" + _print(node.right, _P_UNARY)
        level = _P_MUL
    elif isinstance(node, Pow):
        text = _print(node.left, _P_ATOM) + "^" + _print(node.right, _P_UNARY)
        level = _P_POW
    elif isinstance(node, Call):
        text, level = node.func + "(" + _print(node.arg, _P_ADD) + ")", _P_ATOM
    else:
        raise TypeError("not an AST node: %r" % (node,))
    if level < ctx:
        return "(" + text + ")"
    return text


def to_string(ast):
    """Render an AST to a string that re-parses to a structurally equal AST
    (for parser-produced trees; synthesized negative literals re-parse to a
    value-equal Neg form)."""
    return _print(ast, _P_ADD)


# ---------------------------------------------------------------------------
# Bytecode compilation (shared with the jit kernels)

_MAX_STACK = kernels.STACK_SIZE

_CALL_OPS = {
    "sin": kernels.OP_SIN,
    "cos": kernels.OP_COS,
    "exp": kernels.OP_EXP,
    "sqrt": kernels.OP_SQRT,
    "abs": kernels.OP_ABS,
}

_BIN_OPS = {
    Add: kernels.OP_ADD,
    Sub: kernels.OP_SUB,
    Mul: kernels.OP_MUL,
    Div: kernels.OP_DIV,
    Pow: kernels.OP_POW,
}


def _compile(ast):
    code = []
    consts = []
    const_index = {}

    def emit_const(v):
        key = (v, math.copysign(1.0, v))
        idx = const_index.get(key)
        if idx is None:
            idx = len(consts)
            consts.append(v)
            const_index[key] = idx
        code.append((kernels.OP_CONST, idx))
        return 1

    def walk(node):
        # returns stack growth high-water mark of this subtree
        if isinstance(node, Num):
            return emit_const(node.value)
        if isinstance(node, Pi):
            return emit_const(math.pi)
        if isinstance(node, Var):
            code.append((kernels.OP_X, 0))
            return 1
        if isinstance(node, Neg):
            depth = walk(node.operand)
            code.append((kernels.OP_NEG, 0))
            return depth
        if isinstance(node, Call):
            depth = walk(node.arg)
            code.append((_CALL_OPS[node.func], 0))
            return depth
        if type(node) in _BIN_OPS:
            dl = walk(node.left)
            dr = walk(node.right)
            code.append((_BIN_OPS[type(node)], 0))
            return max(dl, 1 + dr)
        raise TypeError("not an AST node: %r" % (node,))

    depth = walk(ast)
    if depth > _MAX_STACK:
        raise ExpressionSyntaxError(
            "expression nested too deeply (stack %d > %d)"
            % (depth, _MAX_STACK))
    flat = np.asarray([v for pair in code for v in pair], dtype=np.int64)
    return flat, np.asarray(consts, dtype=np.float64)


def _eval_bytecode_vec(code, consts, x):
    """Vectorized reference interpreter over an ndarray of abscissae."""
    stack = []
    with np.errstate(all="ignore"):
        i = 0
        n = code.shape[0]
        while i < n:
            op = code[i]
            arg = code[i + 1]
            i += 2
            if op == kernels.OP_CONST:
                stack.append(np.full_like(x, consts[arg]))
            elif op == kernels.OP_X:
                stack.append(x.astype(float, copy=True))
            elif op == kernels.OP_NEG:
                stack[-1] = -stack[-1]
            elif op == kernels.OP_SIN:
                stack[-1] = np.sin(stack[-1])
            elif op == kernels.OP_COS:
                stack[-1] = np.cos(stack[-1])
            elif op == kernels.OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == kernels.OP_SQRT:
                stack[-1] = np.sqrt(stack[-1])
            elif op == kernels.OP_ABS:
                stack[-1] = np.abs(stack[-1])
            else:
                b = stack.pop()
                a = stack[-1]
                if op == kernels.OP_ADD:
                    stack[-1] = a + b
                elif op == kernels.OP_SUB:
                    stack[-1] = a - b
                elif op == kernels.OP_MUL:
                    stack[-1] = a * b
                elif op == kernels.OP_DIV:
                    stack[-1] = a / b
                else:
                    stack[-1] = a ** b
    return stack[0]


# ---------------------------------------------------------------------------
# Potential variants

_EMPTY_I8 = np.empty(0, dtype=np.int64)
_EMPTY_F8 = np.empty(0, dtype=np.float64)


class Potential:
    """Base class; see module docstring for the three variants."""

    __slots__ = ()

    def kernel_spec(self, edge_length):
        """Uniform tuple handed to the jit kernels; see kernels docstring."""
        raise NotImplementedError


class Constant(Potential):
    __slots__ = ("value", "_consts")

    def __init__(self, value):
        v = float(value)
        if not math.isfinite(v):
            raise PotentialError("constant potential must be finite")
        self.value = v
        self._consts = np.asarray([v], dtype=np.float64)

    def kernel_spec(self, edge_length):
        return (kernels.KIND_CONSTANT, _EMPTY_I8, self._consts,
                _EMPTY_F8, _EMPTY_F8, 0.0)

    def __eq__(self, other):
        return isinstance(other, Constant) and self.value == other.value

    def __hash__(self):
        return hash(("Constant", self.value))

    def __repr__(self):
        return "Constant(%r)" % self.value


class Expression(Potential):
    __slots__ = ("source", "ast", "_code", "_consts")

    def __init__(self, source):
        if isinstance(source, str):
            self.source = source
            self.ast = parse(source)
        elif isinstance(source, _Node):
            self.ast = source
            self.source = to_string(source)
        else:
            raise PotentialError("Expression needs a string or an AST")
        self._code, self._consts = _compile(self.ast)

    def kernel_spec(self, edge_length):
        return (kernels.KIND_EXPRESSION, self._code, self._consts,
                _EMPTY_F8, _EMPTY_F8, 0.0)

    def __eq__(self, other):
        return isinstance(other, Expression) and self.ast == other.ast

    def __hash__(self):
        return hash(("Expression", self.ast))

    def __repr__(self):
        return "Expression(%r)" % self.source


class Samples(Potential):
    __slots__ = ("values", "_slope_cache")

    def __init__(self, values):
        vals = tuple(float(v) for v in values)
        if len(vals) < 2:
            raise PotentialError("Samples needs at least two values")
        if not all(math.isfinite(v) for v in vals):
            raise PotentialError("sample values must be finite")
        self.values = vals
        self._slope_cache = {}

    def _arrays(self, edge_length):
        if edge_length <= 0.0:
            raise PotentialError("edge length must be positive")
        cached = self._slope_cache.get(edge_length)
        if cached is None:
            vals = np.asarray(self.values, dtype=np.float64)
            xs = np.linspace(0.0, edge_length, len(vals))
            ders = PchipInterpolator(xs, vals).derivative()(xs)
            cached = (vals, np.ascontiguousarray(ders),
                      edge_length / (len(vals) - 1))
            self._slope_cache[edge_length] = cached
        return cached

    def kernel_spec(self, edge_length):
        vals, ders, grid_h = self._arrays(edge_length)
        return (kernels.KIND_SAMPLES, _EMPTY_I8, _EMPTY_F8,
                vals, ders, grid_h)

    def __eq__(self, other):
        return isinstance(other, Samples) and self.values == other.values

    def __hash__(self):
        return hash(("Samples", self.values))

    def __repr__(self):
        return "Samples(%r)" % (list(self.values),)


# ---------------------------------------------------------------------------
# Evaluation and integrals


def _hermite_vec(vals, ders, grid_h, x):
    m = len(vals)
    i = np.clip((x / grid_h).astype(int), 0, m - 2)
    t = (x - i * grid_h) / grid_h
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return (h00 * vals[i] + h01 * vals[i + 1]
            + grid_h * (h10 * ders[i] + h11 * ders[i + 1]))


def _evaluate_raw(p, x, edge_length):
    if isinstance(p, Constant):
        return np.full_like(x, p.value)
    if isinstance(p, Expression):
        return _eval_bytecode_vec(p._code, p._consts, x)
    if isinstance(p, Samples):
        vals, ders, grid_h = p._arrays(edge_length)
        return _hermite_vec(vals, ders, grid_h, x)
    raise TypeError("not a Potential: %r" % (p,))


def evaluate(p, x, edge_length):
    """Evaluate a potential at x (scalar or ndarray) on [0, edge_length].

    Raises DomainError if any value is non-finite (division by zero,
    sqrt of a negative number, overflow).
    """
    scalar = np.isscalar(x) or getattr(x, "ndim", 1) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = _evaluate_raw(p, xs, edge_length)
    bad = ~np.isfinite(out)
    if bad.any():
        raise DomainError(
            "potential non-finite at x=%g" % xs[bad][0])
    if scalar:
        return float(out[0])
    return out


def integrate_edge(p, edge_length, tol=1e-12):
    """Integral of the potential over [0, edge_length], error below tol."""
    if edge_length < 0:
        raise ValueError("edge length must be nonnegative")
    if isinstance(p, Constant):
        return p.value * edge_length
    return integrate(lambda xs: _evaluate_raw(p, xs, edge_length),
                     0.0, edge_length, tol)


def sup_norm_estimate(p, edge_length):
    """Upper estimate of max |q| on the edge (exact for Constant, sampled
    with a 1.1 safety factor otherwise)."""
    if isinstance(p, Constant):
        return abs(p.value)
    xs = np.linspace(0.0, edge_length, 1025)
    if isinstance(p, Samples):
        xs = np.union1d(xs, np.linspace(0.0, edge_length, len(p.values)))
    return 1.1 * float(np.max(np.abs(evaluate(p, xs, edge_length))))


# ---------------------------------------------------------------------------
# Structural transforms (used for coupling-strength sweeps and
# orientation changes)


def scale_potential(p, c):
    """Potential pointwise multiplied by the constant c."""
    c = float(c)
    if c == 0.0:
        return Constant(0.0)
    if c == 1.0:
        return p
    if isinstance(p, Constant):
        return Constant(c * p.value)
    if isinstance(p, Samples):
        return Samples(tuple(c * v for v in p.values))
    if isinstance(p, Expression):
        if c < 0:
            return Expression(Neg(Mul(Num(-c), p.ast)))
        return Expression(Mul(Num(c), p.ast))
    raise TypeError("not a Potential: %r" % (p,))


def offset_potential(p, c):
    """Potential shifted pointwise by the constant c."""
    c = float(c)
    if c == 0.0:
        return p
    if isinstance(p, Constant):
        return Constant(p.value + c)
    if isinstance(p, Samples):
        return Samples(tuple(v + c for v in p.values))
    if isinstance(p, Expression):
        if c < 0:
            return Expression(Sub(p.ast, Num(-c)))
        return Expression(Add(p.ast, Num(c)))
    raise TypeError("not a Potential: %r" % (p,))


def _substitute_var(node, replacement):
    if isinstance(node, Var):
        return replacement
    if isinstance(node, (Num, Pi)):
        return node
    if isinstance(node, Neg):
        return Neg(_substitute_var(node.operand, replacement))
    if isinstance(node, Call):
        return Call(node.func, _substitute_var(node.arg, replacement))
    return type(node)(_substitute_var(node.left, replacement),
                      _substitute_var(node.right, replacement))


def reflect_potential(p, edge_length):
    """Potential seen from the opposite edge orientation: q(L - x)."""
    if isinstance(p, Constant):
        return p
    if isinstance(p, Samples):
        return Samples(tuple(reversed(p.values)))
    if isinstance(p, Expression):
        flipped = _substitute_var(p.ast, Sub(Num(float(edge_length)), Var()))
        return Expression(flipped)
    raise TypeError("not a Potential: %r" % (p,))


# ---------------------------------------------------------------------------
# JSON codec (graph file schema)


def potential_from_json(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise PotentialError("potential must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "constant":
        if "value" not in obj:
            raise PotentialError("constant potential needs 'value'")
        return Constant(obj["value"])
    if kind == "expr":
        if "expr" not in obj:
            raise PotentialError("expr potential needs 'expr'")
        return Expression(obj["expr"])
    if kind == "samples":
        if "values" not in obj:
            raise PotentialError("samples potential needs 'values'")
        return Samples(obj["values"])
    raise PotentialError("unknown potential kind %r" % (kind,))


def potential_to_json(p):
    if isinstance(p, Constant):
        return {"kind": "constant", "value": p.value}
    if isinstance(p, Expression):
        return {"kind": "expr", "expr": p.source}
    if isinstance(p, Samples):
        return {"kind": "samples", "values": list(p.values)}
    raise TypeError("not a Potential: %r" % (p,))
