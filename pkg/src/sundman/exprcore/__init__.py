"""Expression parsing, evaluation and exact symbolic differentiation."""

from .calculus import differentiate, simplify, substitute
from .evaluate import Compiled, DomainError, checked_eval, compiled, evaluate
from .functions import (
    REAL_LINE,
    Compose,
    Fn,
    ScalarFunction,
    closed_form,
    compose,
    constant,
    grid,
    identity,
    intersect,
    restrict,
)
from .nodes import (
    FUNCTIONS,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    as_expr,
    func,
    to_string,
)
from .parser import ParseError, parse

eval_expr = evaluate

__all__ = [
    "FUNCTIONS",
    "REAL_LINE",
    "Add",
    "Compiled",
    "Compose",
    "Const",
    "Div",
    "DomainError",
    "Expr",
    "Fn",
    "Func",
    "Mul",
    "Neg",
    "ParseError",
    "Pow",
    "ScalarFunction",
    "Sub",
    "Var",
    "as_expr",
    "checked_eval",
    "closed_form",
    "compiled",
    "compose",
    "constant",
    "differentiate",
    "eval_expr",
    "evaluate",
    "func",
    "grid",
    "identity",
    "intersect",
    "parse",
    "restrict",
    "simplify",
    "substitute",
    "to_string",
]
