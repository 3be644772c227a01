"""Arithmetic expressions with exact symbolic differentiation.

Conformal factors and boundary data are given in run configs as plain
expression strings; this module parses them into a small immutable AST,
evaluates them (scalars or numpy arrays), and differentiates them exactly.

Grammar, lowest to highest precedence:

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # '^' is right-associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Known functions: exp, log, sin, cos, tan, cot, sqrt, abs.  Positions in
error messages are 0-based byte offsets into the source string.

Differentiation performs constant folding only; correctness is checked
numerically (against central finite differences) rather than by any
canonical form.  ASTs are frozen dataclasses: safe to share across
threads and evaluate concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Neg", "BinOp", "Call",
    "ExprError", "ExprSyntaxError", "ExprDomainError", "ExprNameError",
    "parse", "evaluate", "differentiate", "to_string", "free_variables",
    "FUNCTIONS",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "cot", "sqrt", "abs")


class ExprError(ValueError):
    """Base class for expression failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message, position, expected=None):
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {position}{hint}")
        self.position = position
        self.expected = expected


class ExprDomainError(ExprError):
    """Evaluation left a function's domain; carries the offending subtree."""

    def __init__(self, message, node):
        super().__init__(f"{message} in subexpression '{to_string(node)}'")
        self.node = node


class ExprNameError(ExprError):
    """A free variable was not supplied at bind (evaluation) time."""


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


# ---------------------------------------------------------------------------
# tokenizer / parser

_OPS = "+-*/^"


class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def peek(self):
        t = self.text
        i = self.pos
        while i < len(t) and t[i].isspace():
            i += 1
        self.pos = i
        if i >= len(t):
            return ("end", "", i)
        c = t[i]
        if c in _OPS or c in "()":
            return (c, c, i)
        if c.isdigit() or c == ".":
            j = i
            while j < len(t) and (t[j].isdigit() or t[j] == "."):
                j += 1
            if j < len(t) and t[j] in "eE":
                k = j + 1
                if k < len(t) and t[k] in "+-":
                    k += 1
                if k < len(t) and t[k].isdigit():
                    j = k
                    while j < len(t) and t[j].isdigit():
                        j += 1
            lit = t[i:j]
            try:
                float(lit)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal '{lit}'", i) from None
            return ("num", lit, i)
        if c.isalpha() or c == "_":
            j = i
            while j < len(t) and (t[j].isalnum() or t[j] == "_"):
                j += 1
            return ("name", t[i:j], i)
        raise ExprSyntaxError(f"unexpected character '{c}'", i)

    def next(self):
        kind, lit, at = self.peek()
        self.pos = at + len(lit)
        return kind, lit, at


class _Parser:
    def __init__(self, text, allowed_vars=None):
        self.tk = _Tokenizer(text)
        self.allowed = None if allowed_vars is None else set(allowed_vars)

    def parse(self):
        e = self.expr()
        kind, lit, at = self.tk.peek()
        if kind != "end":
            raise ExprSyntaxError(f"trailing input '{lit}'", at, "end of input")
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, _, _ = self.tk.peek()
            if kind in "+-":
                self.tk.next()
                e = _fold_binop(kind, e, self.term())
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, _, _ = self.tk.peek()
            if kind in "*/":
                self.tk.next()
                e = _fold_binop(kind, e, self.unary())
            else:
                return e

    def unary(self):
        kind, _, _ = self.tk.peek()
        if kind == "-":
            self.tk.next()
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        return self.power()

    def power(self):
        base = self.atom()
        kind, _, _ = self.tk.peek()
        if kind == "^":
            self.tk.next()
            return _fold_binop("^", base, self.unary())
        return base

    def atom(self):
        kind, lit, at = self.tk.next()
        if kind == "num":
            return Const(float(lit))
        if kind == "(":
            e = self.expr()
            kind2, _, at2 = self.tk.next()
            if kind2 != ")":
                raise ExprSyntaxError("unbalanced parenthesis", at2, "')'")
            return e
        if kind == "name":
            nxt, _, _ = self.tk.peek()
            if nxt == "(":
                if lit not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function '{lit}'", at,
                                          "one of " + ", ".join(FUNCTIONS))
                self.tk.next()
                arg = self.expr()
                kind2, _, at2 = self.tk.next()
                if kind2 != ")":
                    raise ExprSyntaxError("unbalanced parenthesis", at2, "')'")
                return Call(lit, arg)
            if self.allowed is not None and lit not in self.allowed:
                raise ExprSyntaxError(f"unknown variable '{lit}'", at,
                                      "one of " + ", ".join(sorted(self.allowed)))
            return Var(lit)
        raise ExprSyntaxError("expected an operand" if kind == "end"
                              else f"unexpected token '{lit}'", at,
                              "number, name or '('")


def parse(text, allowed_vars=None):
    """Parse an expression string into an AST.

    allowed_vars, when given, restricts variable names at parse time so a
    config typo is diagnosed with its byte position instead of surfacing
    later at evaluation.
    """
    return _Parser(text, allowed_vars).parse()


# ---------------------------------------------------------------------------
# evaluation

def evaluate(e, bindings):
    """Evaluate `e` with the given name->value bindings.

    Values may be floats or numpy arrays (broadcast elementwise).  Raises
    ExprNameError for unbound variables and ExprDomainError when any
    sample leaves a function's domain.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise ExprNameError(f"unbound variable '{e.name}'") from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, bindings)
    if isinstance(e, BinOp):
        a = evaluate(e.lhs, bindings)
        b = evaluate(e.rhs, bindings)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if np.any(b == 0):
                raise ExprDomainError("division by zero", e)
            return a / b
        if e.op == "^":
            with np.errstate(invalid="ignore", divide="ignore"):
                out = np.power(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else None
                if out is None:
                    try:
                        out = math.pow(a, b)
                    except (ValueError, OverflowError):
                        raise ExprDomainError("invalid power", e) from None
            if np.any(~np.isfinite(out)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b)):
                raise ExprDomainError("invalid power", e)
            return out
        raise AssertionError(e.op)
    if isinstance(e, Call):
        a = evaluate(e.arg, bindings)
        if e.fn == "exp":
            return np.exp(a) if isinstance(a, np.ndarray) else math.exp(a)
        if e.fn == "log":
            if np.any(a <= 0):
                raise ExprDomainError("log of a non-positive value", e)
            return np.log(a) if isinstance(a, np.ndarray) else math.log(a)
        if e.fn == "sin":
            return np.sin(a)
        if e.fn == "cos":
            return np.cos(a)
        if e.fn == "tan":
            return np.tan(a)
        if e.fn == "cot":
            s = np.sin(a)
            if np.any(s == 0):
                raise ExprDomainError("cot at a zero of sin", e)
            return np.cos(a) / s
        if e.fn == "sqrt":
            if np.any(a < 0):
                raise ExprDomainError("sqrt of a negative value", e)
            return np.sqrt(a)
        if e.fn == "abs":
            return np.abs(a)
        raise AssertionError(e.fn)
    raise TypeError(f"not an Expr: {e!r}")


def free_variables(e):
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_variables(e.arg)
    if isinstance(e, BinOp):
        return free_variables(e.lhs) | free_variables(e.rhs)
    if isinstance(e, Call):
        return free_variables(e.arg)
    return set()


# ---------------------------------------------------------------------------
# differentiation

def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def _fold_binop(op, a, b):
    # constant folding only; skipped when folding itself would be a domain error
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            return Const(float(evaluate(BinOp(op, a, b), {})))
        except ExprError:
            pass
    return BinOp(op, a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    return Neg(a)


def differentiate(e, var):
    """Exact symbolic derivative of `e` with respect to `var`."""
    d = differentiate
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0) if e.name == var else Const(0.0)
    if isinstance(e, Neg):
        return _neg(d(e.arg, var))
    if isinstance(e, BinOp):
        a, b = e.lhs, e.rhs
        da, db = d(a, var), d(b, var)
        if e.op in "+-":
            return _fold_binop(e.op, da, db)
        if e.op == "*":
            return _fold_binop("+", _fold_binop("*", da, b), _fold_binop("*", a, db))
        if e.op == "/":
            num = _fold_binop("-", _fold_binop("*", da, b), _fold_binop("*", a, db))
            return _fold_binop("/", num, _fold_binop("^", b, Const(2.0)))
        if e.op == "^":
            if isinstance(b, Const):
                # c * a^(c-1) * a'
                pw = _fold_binop("^", a, Const(b.value - 1.0))
                return _fold_binop("*", _fold_binop("*", b, pw), da)
            # general: a^b * (b' log a + b a'/a)
            t1 = _fold_binop("*", db, Call("log", a))
            t2 = _fold_binop("/", _fold_binop("*", b, da), a)
            return _fold_binop("*", e, _fold_binop("+", t1, t2))
        raise AssertionError(e.op)
    if isinstance(e, Call):
        a = e.arg
        da = d(a, var)
        if _is_const(da, 0.0):
            return Const(0.0)
        if e.fn == "exp":
            return _fold_binop("*", e, da)
        if e.fn == "log":
            return _fold_binop("/", da, a)
        if e.fn == "sin":
            return _fold_binop("*", Call("cos", a), da)
        if e.fn == "cos":
            return _fold_binop("*", _neg(Call("sin", a)), da)
        if e.fn == "tan":
            sec2 = _fold_binop("+", Const(1.0), _fold_binop("^", Call("tan", a), Const(2.0)))
            return _fold_binop("*", sec2, da)
        if e.fn == "cot":
            csc2 = _fold_binop("+", Const(1.0), _fold_binop("^", Call("cot", a), Const(2.0)))
            return _fold_binop("*", _neg(csc2), da)
        if e.fn == "sqrt":
            return _fold_binop("/", da, _fold_binop("*", Const(2.0), e))
        if e.fn == "abs":
            # d|a| = a/|a| * a'; undefined at a == 0, reported there as a
            # division-by-zero domain error
            return _fold_binop("*", _fold_binop("/", a, e), da)
        raise AssertionError(e.fn)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Const) and e.value < 0:
        return _PREC["neg"]
    return _PREC["atom"]


def _wrap(s, need):
    return f"({s})" if need else s


def to_string(e):
    """Render the AST so that parse(to_string(e)) == e."""
    if isinstance(e, Const):
        v = e.value
        if v == math.floor(v) and abs(v) < 1e16:
            return repr(v)
        return repr(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(to_string(e.arg), _prec(e.arg) < _PREC["neg"])
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        ls, rs = to_string(e.lhs), to_string(e.rhs)
        if e.op == "^":
            # power := atom '^' unary
            return _wrap(ls, _prec(e.lhs) < _PREC["atom"]) + "^" + \
                _wrap(rs, _prec(e.rhs) < _PREC["neg"])
        # left-associative chain: parenthesize an rhs at equal precedence
        return _wrap(ls, _prec(e.lhs) < p) + e.op + _wrap(rs, _prec(e.rhs) <= p)
    raise TypeError(f"not an Expr: {e!r}")
