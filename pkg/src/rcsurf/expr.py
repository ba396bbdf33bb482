"""Closed-form scalar expressions: parse, evaluate, differentiate exactly.

Expressions are immutable, hash-consed AST nodes, so structurally equal
subtrees are shared.  Sharing is what keeps the derived expression DAGs
(metric inverses, connection coefficients, normal fields and their
derivatives) small enough to evaluate quickly: the evaluator memoizes per
node and therefore computes every distinct subexpression once, whether the
bindings are scalars or numpy arrays covering a whole sample grid.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative, binds above '-'
    atom   := NUMBER | 'pi' | NAME '(' expr ')' | NAME | '(' expr ')'

Functions: sin cos tan sinh cosh tanh sech exp log sqrt abs sign.
Differentiation is exact; the only simplification applied is constant
folding and 0/1 absorption.  abs differentiates to sign with sign(0) = 0,
so sampled domains must avoid kinks.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownFunction, UnknownVariable

__all__ = [
    "Expr", "parse", "con", "var", "add", "sub", "mul", "div", "pow_", "neg",
    "call", "diff", "compose", "evaluate", "evaluate_many", "free_vars",
    "eval_table", "FUNCTIONS", "PI",
]

_CONST, _VAR, _NEG, _ADD, _SUB, _MUL, _DIV, _POW, _CALL = range(9)

_OP_NAMES = {_ADD: "+", _SUB: "-", _MUL: "*", _DIV: "/", _POW: "^"}


class Expr:
    """One interned AST node.  Construct through the module functions."""

    __slots__ = ("kind", "a", "b", "value", "name", "_hash")

    def __init__(self, kind, a=None, b=None, value=None, name=None):
        self.kind = kind
        self.a = a
        self.b = b
        self.value = value
        self.name = name
        self._hash = hash((kind, id(a), id(b), value, name))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Expr({to_string(self)})"

    def __str__(self):
        return to_string(self)

    # convenience for tests and scene construction
    def __call__(self, **bindings):
        return evaluate(self, bindings)


_interned: dict = {}


def _intern(kind, a=None, b=None, value=None, name=None):
    key = (kind, id(a) if a is not None else None,
           id(b) if b is not None else None, value, name)
    node = _interned.get(key)
    if node is None:
        node = Expr(kind, a, b, value, name)
        _interned[key] = node
    return node


def con(value) -> Expr:
    return _intern(_CONST, value=float(value))


def var(name) -> Expr:
    return _intern(_VAR, name=name)


PI = con(math.pi)
ZERO = con(0.0)
ONE = con(1.0)


def _is_const(e, v=None):
    return e.kind == _CONST and (v is None or e.value == v)


def add(x, y) -> Expr:
    if _is_const(x) and _is_const(y):
        return con(x.value + y.value)
    if _is_const(x, 0.0):
        return y
    if _is_const(y, 0.0):
        return x
    return _intern(_ADD, x, y)


def sub(x, y) -> Expr:
    if _is_const(x) and _is_const(y):
        return con(x.value - y.value)
    if _is_const(y, 0.0):
        return x
    if _is_const(x, 0.0):
        return neg(y)
    if x is y:
        return ZERO
    return _intern(_SUB, x, y)


def mul(x, y) -> Expr:
    if _is_const(x) and _is_const(y):
        return con(x.value * y.value)
    if _is_const(x, 0.0) or _is_const(y, 0.0):
        return ZERO
    if _is_const(x, 1.0):
        return y
    if _is_const(y, 1.0):
        return x
    if _is_const(x, -1.0):
        return neg(y)
    if _is_const(y, -1.0):
        return neg(x)
    return _intern(_MUL, x, y)


def div(x, y) -> Expr:
    if _is_const(y):
        if y.value == 0.0:
            raise EvalDomainError("/", 0.0)
        if _is_const(x):
            return con(x.value / y.value)
        if y.value == 1.0:
            return x
    if _is_const(x, 0.0):
        return ZERO
    if x is y:
        return ONE
    return _intern(_DIV, x, y)


def pow_(x, y) -> Expr:
    if _is_const(y):
        if y.value == 0.0:
            return ONE
        if y.value == 1.0:
            return x
        if _is_const(x):
            try:
                v = _checked_pow(x.value, y.value)
            except EvalDomainError:
                return _intern(_POW, x, y)
            return con(v)
    if _is_const(x, 1.0):
        return ONE
    return _intern(_POW, x, y)


def neg(x) -> Expr:
    if _is_const(x):
        return con(-x.value)
    if x.kind == _NEG:
        return x.a
    return _intern(_NEG, x)


def call(fn, x) -> Expr:
    if fn not in FUNCTIONS:
        raise UnknownFunction(fn)
    if _is_const(x):
        try:
            return con(_apply_scalar(fn, x.value))
        except EvalDomainError:
            pass
    return _intern(_CALL, x, name=fn)


# --- function tables -------------------------------------------------------

def _sech(x):
    return 1.0 / np.cosh(x)


FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "sech": _sech, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "sign": np.sign,
}


def _checked_pow(base, expo):
    b = np.asarray(base)
    e = np.asarray(expo)
    frac = np.any(e != np.floor(e))
    if frac and np.any(b < 0.0):
        bad = float(np.min(b))
        raise EvalDomainError("^", bad)
    if np.any((b == 0.0) & (e < 0.0)):
        raise EvalDomainError("^", 0.0)
    out = np.power(b, e)
    if b.ndim == 0 and e.ndim == 0:
        return float(out)
    return out


def _apply_fn(fn, x):
    if fn == "log":
        if np.any(np.asarray(x) <= 0.0):
            raise EvalDomainError("log", float(np.min(x)))
    elif fn == "sqrt":
        if np.any(np.asarray(x) < 0.0):
            raise EvalDomainError("sqrt", float(np.min(x)))
    return FUNCTIONS[fn](x)


def _apply_scalar(fn, x):
    return float(_apply_fn(fn, x))


# --- evaluation ------------------------------------------------------------

def evaluate(e: Expr, bindings, memo=None):
    """Evaluate one expression; see evaluate_many for the engine."""
    return evaluate_many([e], bindings, memo)[0]


def evaluate_many(exprs, bindings, memo=None):
    """Evaluate several expressions under the same bindings.

    Bindings map variable names to floats or numpy arrays (all of one
    shape).  A single memo keyed by node identity is shared across the
    list, so the common subexpression DAG is evaluated exactly once.
    """
    if memo is None:
        memo = {}
    out = []
    for e in exprs:
        out.append(_eval_iter(e, bindings, memo))
    return out


def _eval_iter(root, bindings, memo):
    stack = [root]
    while stack:
        e = stack[-1]
        eid = id(e)
        if eid in memo:
            stack.pop()
            continue
        k = e.kind
        if k == _CONST:
            memo[eid] = e.value
            stack.pop()
        elif k == _VAR:
            try:
                memo[eid] = bindings[e.name]
            except KeyError:
                raise UnknownVariable(e.name) from None
            stack.pop()
        elif k == _NEG or k == _CALL:
            aid = id(e.a)
            if aid in memo:
                av = memo[aid]
                memo[eid] = -av if k == _NEG else _apply_fn(e.name, av)
                stack.pop()
            else:
                stack.append(e.a)
        else:
            aid, bid = id(e.a), id(e.b)
            ready = True
            if aid not in memo:
                stack.append(e.a)
                ready = False
            if bid not in memo:
                stack.append(e.b)
                ready = False
            if not ready:
                continue
            av, bv = memo[aid], memo[bid]
            if k == _ADD:
                memo[eid] = av + bv
            elif k == _SUB:
                memo[eid] = av - bv
            elif k == _MUL:
                memo[eid] = av * bv
            elif k == _DIV:
                if np.any(np.asarray(bv) == 0.0):
                    raise EvalDomainError("/", 0.0)
                memo[eid] = av / bv
            else:
                memo[eid] = _checked_pow(av, bv)
            stack.pop()
    return memo[id(root)]


def eval_table(table, bindings, memo=None):
    """Evaluate a nested list of Exprs into one ndarray.

    The result has shape batch_shape + nest_shape where batch_shape comes
    from the array bindings (scalar bindings give batch_shape = ()).
    Constant subexpressions broadcast.  One memo serves the whole table, so
    the shared DAG is evaluated once.
    """
    if memo is None:
        memo = {}
    batch = ()
    for v in bindings.values():
        v = np.asarray(v)
        if v.shape:
            batch = v.shape
            break

    def nest_shape(t):
        return (len(t),) + nest_shape(t[0]) if isinstance(t, (list, tuple)) else ()

    shape = batch + nest_shape(table)
    out = np.empty(shape, dtype=float)

    def walk(t, idx):
        if isinstance(t, (list, tuple)):
            for i, s in enumerate(t):
                walk(s, idx + (i,))
        else:
            val = _eval_iter(t, bindings, memo)
            sl = (Ellipsis,) + idx
            out[sl] = val

    walk(table, ())
    return out


# --- differentiation -------------------------------------------------------

_diff_cache: dict = {}

_FN_DERIV = {
    "sin": lambda u: call("cos", u),
    "cos": lambda u: neg(call("sin", u)),
    "tan": lambda u: div(ONE, mul(call("cos", u), call("cos", u))),
    "sinh": lambda u: call("cosh", u),
    "cosh": lambda u: call("sinh", u),
    "tanh": lambda u: mul(call("sech", u), call("sech", u)),
    "sech": lambda u: neg(mul(call("sech", u), call("tanh", u))),
    "exp": lambda u: call("exp", u),
    "log": lambda u: div(ONE, u),
    "sqrt": lambda u: div(con(0.5), call("sqrt", u)),
    "abs": lambda u: call("sign", u),
    "sign": lambda u: ZERO,
}


def diff(e: Expr, name: str) -> Expr:
    """Exact symbolic derivative of e with respect to the named variable."""
    key = (id(e), name)
    d = _diff_cache.get(key)
    if d is not None:
        return d
    k = e.kind
    if k == _CONST:
        d = ZERO
    elif k == _VAR:
        d = ONE if e.name == name else ZERO
    elif k == _NEG:
        d = neg(diff(e.a, name))
    elif k == _ADD:
        d = add(diff(e.a, name), diff(e.b, name))
    elif k == _SUB:
        d = sub(diff(e.a, name), diff(e.b, name))
    elif k == _MUL:
        d = add(mul(diff(e.a, name), e.b), mul(e.a, diff(e.b, name)))
    elif k == _DIV:
        da, db = diff(e.a, name), diff(e.b, name)
        d = sub(div(da, e.b), div(mul(e.a, db), mul(e.b, e.b)))
    elif k == _POW:
        da, db = diff(e.a, name), diff(e.b, name)
        if _is_const(e.b):
            # c * f^(c-1) * f'
            d = mul(mul(e.b, pow_(e.a, con(e.b.value - 1.0))), da)
        else:
            # f^g * (g' log f + g f'/f)
            inner = add(mul(db, call("log", e.a)), mul(e.b, div(da, e.a)))
            d = mul(e, inner)
    else:  # _CALL
        d = mul(_FN_DERIV[e.name](e.a), diff(e.a, name))
    _diff_cache[key] = d
    return d


def free_vars(e: Expr) -> frozenset:
    seen = {}
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        if n.kind == _VAR:
            seen[id(n)] = frozenset((n.name,))
        else:
            kids = [c for c in (n.a, n.b) if c is not None]
            pending = [c for c in kids if id(c) not in seen]
            if pending:
                stack.append(n)
                stack.extend(pending)
                continue
            acc = frozenset()
            for c in kids:
                acc |= seen[id(c)]
            seen[id(n)] = acc
    return seen[id(e)]


def compose(e: Expr, mapping, memo=None) -> Expr:
    """Substitute expressions for variables: mapping is name -> Expr."""
    if memo is None:
        memo = {}
    stack = [e]
    while stack:
        n = stack[-1]
        if id(n) in memo:
            stack.pop()
            continue
        k = n.kind
        if k == _CONST:
            memo[id(n)] = n
            stack.pop()
        elif k == _VAR:
            memo[id(n)] = mapping.get(n.name, n)
            stack.pop()
        else:
            kids = [c for c in (n.a, n.b) if c is not None]
            pending = [c for c in kids if id(c) not in memo]
            if pending:
                stack.extend(pending)
                continue
            a = memo[id(n.a)]
            b = memo[id(n.b)] if n.b is not None else None
            if k == _NEG:
                r = neg(a)
            elif k == _ADD:
                r = add(a, b)
            elif k == _SUB:
                r = sub(a, b)
            elif k == _MUL:
                r = mul(a, b)
            elif k == _DIV:
                r = div(a, b)
            elif k == _POW:
                r = pow_(a, b)
            else:
                r = call(n.name, a)
            memo[id(n)] = r
            stack.pop()
    return memo[id(e)]


# --- printing --------------------------------------------------------------

_PREC = {_ADD: 1, _SUB: 1, _MUL: 2, _DIV: 2, _NEG: 3, _POW: 4,
         _CONST: 9, _VAR: 9, _CALL: 9}


def to_string(e: Expr) -> str:
    """Render to text that parses back to an identically-evaluating Expr."""
    k = e.kind
    if k == _CONST:
        v = e.value
        if v == math.pi:
            return "pi"
        if v < 0:
            return f"(-{-v!r})" if -v != int(-v) else f"(-{int(-v)})"
        return repr(v) if v != int(v) else str(int(v))
    if k == _VAR:
        return e.name
    if k == _CALL:
        return f"{e.name}({to_string(e.a)})"
    if k == _NEG:
        return f"-{_wrap(e.a, _PREC[_NEG] + 1)}"
    if k == _POW:
        return f"{_wrap(e.a, _PREC[_POW] + 1)}^{_wrap(e.b, _PREC[_POW])}"
    sa = _wrap(e.a, _PREC[k])
    sb = _wrap(e.b, _PREC[k] + 1)
    return f"{sa} {_OP_NAMES[k]} {sb}"


def _wrap(e, need):
    s = to_string(e)
    return s if _PREC[e.kind] >= need else f"({s})"


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_RESERVED = frozenset(FUNCTIONS) | {"pi"}


class _Parser:
    def __init__(self, text, allowed):
        self.text = text
        self.allowed = frozenset(allowed)
        self.pos = 0
        self.tok = None       # (kind, value, offset)
        self._advance()

    def _advance(self):
        m = _TOKEN_RE.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:]
            stripped = rest.lstrip()
            if not stripped:
                self.tok = ("end", None, len(self.text))
                self.pos = len(self.text)
            else:
                bad = self.pos + (len(rest) - len(stripped))
                raise ExprSyntaxError(self.text, bad, {"number", "name", "operator"})
            return
        self.pos = m.end()
        off = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        if m.group("num") is not None:
            self.tok = ("num", float(m.group("num")), off)
        elif m.group("name") is not None:
            self.tok = ("name", m.group("name"), off)
        else:
            self.tok = ("op", m.group("op"), off)

    def _expect_op(self, symbol):
        kind, value, off = self.tok
        if kind != "op" or value != symbol:
            raise ExprSyntaxError(self.text, off, {f"'{symbol}'"})
        self._advance()

    def parse(self):
        e = self.expr()
        kind, _, off = self.tok
        if kind != "end":
            raise ExprSyntaxError(self.text, off, {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self):
        e = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self._advance()
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self._advance()
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self._advance()
            return neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self._advance()
            expo = self.unary()
            return pow_(base, expo)
        return base

    def atom(self):
        kind, value, off = self.tok
        if kind == "num":
            self._advance()
            return con(value)
        if kind == "name":
            self._advance()
            if value == "pi":
                return PI
            if value in FUNCTIONS:
                # function application requires parentheses
                k2, v2, off2 = self.tok
                if k2 != "op" or v2 != "(":
                    raise ExprSyntaxError(self.text, off2, {"'('"})
                self._advance()
                arg = self.expr()
                self._expect_op(")")
                return call(value, arg)
            if value in self.allowed:
                return var(value)
            # identifier followed by '(' is an unrecognized function
            if self.tok[0] == "op" and self.tok[1] == "(":
                raise UnknownFunction(value, off)
            raise UnknownVariable(value, off)
        if kind == "op" and value == "(":
            self._advance()
            e = self.expr()
            self._expect_op(")")
            return e
        raise ExprSyntaxError(self.text, off, {"number", "name", "'('", "'-'"})


def parse(text: str, allowed_vars) -> Expr:
    """Parse text into an Expr whose variables all lie in allowed_vars."""
    return _Parser(text, allowed_vars).parse()
