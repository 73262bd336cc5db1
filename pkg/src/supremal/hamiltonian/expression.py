"""Expression language for user-defined Hamiltonians.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' integer)?
    base   := number | 'x'i | 'P'ij | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'

``norm(P)`` is the Frobenius norm of the whole matrix variable; ``norm(a, b, ...)``
is the Euclidean norm of its scalar arguments. Evaluation is vectorised over
leading batch axes of ``x`` (``(..., n)``) and ``P`` (``(..., N, n)``).
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import regex

from supremal.utilities.errors import (
    ArityError,
    ExpressionSyntaxError,
    HamiltonianContractError,
    InvalidInputError,
    UnknownIdentifierError,
)

TOKEN_PATTERN = regex.compile(
    r"""
    (?P<NUMBER>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>[-+*/^(),])
  | (?P<NEWLINE>\n)
  | (?P<SKIP>[ \t\r]+)
  | (?P<MISMATCH>.)
    """,
    regex.VERBOSE,
)
VAR_PATTERN = regex.compile(r"x([1-9][0-9]*)")
ENTRY_PATTERN = regex.compile(r"P([1-9])([1-9])")

UNARY_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs": np.abs,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}
FUNCTIONS = ("abs", "sqrt", "exp", "sin", "cos", "min", "max", "norm")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Entry:
    row: int
    col: int


@dataclass(frozen=True)
class MatrixVar:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Node", ...]


Node = Union[Number, Constant, Var, Entry, MatrixVar, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start = 1, 0
    for match in TOKEN_PATTERN.finditer(text):
        kind = match.lastgroup
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
        elif kind == "SKIP":
            continue
        elif kind == "MISMATCH":
            raise ExpressionSyntaxError(f"Unexpected character {match.group()!r}", line, column)
        else:
            tokens.append(Token(kind, match.group(), line, column))  # type: ignore[arg-type]
    tokens.append(Token("END", "", line, len(text) - line_start + 1))
    return tokens


class Parser:
    """Recursive-descent parser producing a frozen expression tree."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ExpressionSyntaxError:
        token = token or self.current
        return ExpressionSyntaxError(message, token.line, token.column)

    def expect(self, text: str) -> Token:
        if self.current.text != text or self.current.kind == "END":
            found = "end of input" if self.current.kind == "END" else repr(self.current.text)
            raise self.error(f"Expected {text!r}, found {found}")
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "END":
            raise self.error(f"Unexpected {self.current.text!r}")
        _check_matrix_use(node, self.tokens[0])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-") and self.current.kind == "OP":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.current.text in ("*", "/") and self.current.kind == "OP":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.current.kind == "OP" and self.current.text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        if self.current.kind == "OP" and self.current.text == "^":
            self.advance()
            token = self.current
            if token.kind != "NUMBER" or not token.text.isdigit():
                raise self.error("Exponent must be a nonnegative integer")
            self.advance()
            node = Pow(node, int(token.text))
        return node

    def base(self) -> Node:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return Number(float(token.text))
        if token.kind == "IDENT":
            self.advance()
            if self.current.kind == "OP" and self.current.text == "(":
                return self.call(token)
            return _identifier(token)
        if token.kind == "OP" and token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if token.kind == "END" else repr(token.text)
        raise self.error(f"Unexpected {found}")

    def call(self, name: Token) -> Node:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifierError(
                f"Unknown function {name.text!r}", name.line, name.column
            )
        self.expect("(")
        args = [self.expr()]
        while self.current.kind == "OP" and self.current.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        _check_arity(name, len(args))
        return Call(name.text, tuple(args))


def _identifier(token: Token) -> Node:
    text = token.text
    if text == "pi":
        return Constant("pi")
    if text == "P":
        return MatrixVar()
    var = VAR_PATTERN.fullmatch(text)
    if var:
        return Var(int(var.group(1)) - 1)
    entry = ENTRY_PATTERN.fullmatch(text)
    if entry:
        return Entry(int(entry.group(1)) - 1, int(entry.group(2)) - 1)
    raise UnknownIdentifierError(f"Unknown identifier {text!r}", token.line, token.column)


def _check_arity(name: Token, count: int) -> None:
    if name.text in UNARY_FUNCTIONS and count != 1:
        raise ArityError(f"{name.text} takes 1 argument, got {count}", name.line, name.column)
    if name.text in ("min", "max") and count < 2:
        raise ArityError(
            f"{name.text} takes at least 2 arguments, got {count}", name.line, name.column
        )


def _check_matrix_use(node: Node, anchor: Token) -> None:
    """``P`` on its own is only valid as the single argument of ``norm``."""
    for child in _children(node):
        if isinstance(child, MatrixVar):
            if not (isinstance(node, Call) and node.func == "norm" and len(node.args) == 1):
                raise UnknownIdentifierError(
                    "Matrix variable 'P' is only valid as norm(P)", anchor.line, anchor.column
                )
        else:
            _check_matrix_use(child, anchor)
    if isinstance(node, MatrixVar):
        raise UnknownIdentifierError(
            "Matrix variable 'P' is only valid as norm(P)", anchor.line, anchor.column
        )


def _children(node: Node) -> Tuple[Node, ...]:
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Pow):
        return (node.base,)
    if isinstance(node, Call):
        return node.args
    return ()


def parse_expression(text: str) -> Node:
    return Parser(text).parse()


def to_text(node: Node) -> str:
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, Constant):
        return node.name
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Entry):
        return f"P{node.row + 1}{node.col + 1}"
    if isinstance(node, MatrixVar):
        return "P"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{node.exponent})"
    return f"{node.func}({', '.join(to_text(a) for a in node.args)})"


def used_dims(node: Node) -> Tuple[int, int, int, bool]:
    """``(max x index, max row, max col, uses norm(P))``, 1-based, 0 if unused."""
    n_x = rows = cols = 0
    whole = False
    stack = [node]
    while stack:
        item = stack.pop()
        if isinstance(item, Var):
            n_x = max(n_x, item.index + 1)
        elif isinstance(item, Entry):
            rows = max(rows, item.row + 1)
            cols = max(cols, item.col + 1)
        elif isinstance(item, MatrixVar):
            whole = True
        stack.extend(_children(item))
    return n_x, rows, cols, whole


def check_dims(node: Node, N: int, n: int) -> None:
    n_x, rows, cols, _ = used_dims(node)
    if n_x > n:
        raise UnknownIdentifierError(f"Variable x{n_x} exceeds dimension n={n}", 1, 1)
    if rows > N or cols > n:
        raise UnknownIdentifierError(
            f"Entry P{rows}{cols} exceeds matrix dims ({N}, {n})", 1, 1
        )


def evaluate_node(node: Node, x: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Evaluate a tree on batched inputs; invalid arithmetic raises a contract error."""
    if isinstance(node, Number):
        return np.asarray(node.value)
    if isinstance(node, Constant):
        return np.asarray(math.pi)
    if isinstance(node, Var):
        return x[..., node.index]
    if isinstance(node, Entry):
        return P[..., node.row, node.col]
    if isinstance(node, Neg):
        return -evaluate_node(node.operand, x, P)
    if isinstance(node, Pow):
        return evaluate_node(node.base, x, P) ** node.exponent
    if isinstance(node, BinOp):
        left = evaluate_node(node.left, x, P)
        right = evaluate_node(node.right, x, P)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if np.any(right == 0):
            raise HamiltonianContractError(f"Division by zero in {to_text(node)}")
        return left / right
    if isinstance(node, Call):
        if node.func == "norm":
            if len(node.args) == 1 and isinstance(node.args[0], MatrixVar):
                return np.sqrt(np.sum(P * P, axis=(-2, -1)))
            parts = np.broadcast_arrays(*[evaluate_node(a, x, P) for a in node.args])
            return np.sqrt(sum(p * p for p in parts))
        args = [evaluate_node(a, x, P) for a in node.args]
        if node.func == "min":
            return np.minimum.reduce(np.broadcast_arrays(*args))
        if node.func == "max":
            return np.maximum.reduce(np.broadcast_arrays(*args))
        if node.func == "sqrt" and np.any(args[0] < 0):
            raise HamiltonianContractError(f"Square root of a negative value in {to_text(node)}")
        with np.errstate(over="ignore"):
            return UNARY_FUNCTIONS[node.func](args[0])
    raise InvalidInputError(f"Cannot evaluate node {node!r}")
