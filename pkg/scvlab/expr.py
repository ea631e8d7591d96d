"""Weight expressions

A small real-valued expression language over the real and imaginary parts
of complex coordinates, so weights and test functions can be given in a
config file. Grammar (see README):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := number | variable | name '(' args ')' | '(' expr ')'

Variables are x<j>, y<j> (real and imaginary part of z_j) and z_abs2_<j>
(= x<j>^2 + y<j>^2). Functions: exp, log, abs, max, min.
"""

import logging
import math
import re
import typing

from dataclasses import dataclass, field

import numpy as np

from scvlab.errors import (
    ExprArityError,
    ExprDomainError,
    ExprNameError,
    ExprSyntaxError,
)


logger = logging.getLogger(__name__)

FUNCTION_ARITY = {
    'exp': 1,
    'log': 1,
    'abs': 1,
    'max': 2,
    'min': 2,
}
CONSTANTS = {
    'pi': math.pi,
    'e': math.e,
}

_NUMBER = re.compile(r'(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?')
_IDENT = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')
_COORD = re.compile(r'([xy])([1-9]\d*)$')
_ABS2 = re.compile(r'z_abs2_([1-9]\d*)$')
_SYMBOLS = '+-*/^(),'


@dataclass(frozen=True)
class Num:
    """A real literal"""
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    """A coordinate variable: kind is 'x', 'y' or 'z_abs2'"""
    kind: str
    index: int
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    """neg, exp, log or abs of one operand"""
    op: str
    operand: 'Node'
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    """One of + - * / ^"""
    op: str
    left: 'Node'
    right: 'Node'
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    """max or min"""
    name: str
    args: tuple['Node', ...]
    offset: int = field(default=0, compare=False)


Node = Num | Var | Unary | Binary | Call


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(src: str) -> list[Token]:
    """Split source text into tokens, located by byte offset"""
    tokens = []
    pos = 0
    while pos < len(src):
        char = src[pos]
        offset = len(src[:pos].encode())
        if char.isspace():
            pos += 1
            continue
        if char in _SYMBOLS:
            tokens.append(Token('op', char, offset))
            pos += 1
            continue
        if match := _NUMBER.match(src, pos):
            if not math.isfinite(float(match.group())):
                raise ExprSyntaxError(
                    f'number {match.group()} is out of range', offset,
                )
            tokens.append(Token('num', match.group(), offset))
            pos = match.end()
            continue
        if match := _IDENT.match(src, pos):
            tokens.append(Token('ident', match.group(), offset))
            pos = match.end()
            continue
        raise ExprSyntaxError(f'unexpected character {char!r}', offset)
    tokens.append(Token('end', '', len(src.encode())))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self._tokens = tokenize(src)
        self._pos = 0

    @property
    def _current(self) -> Token:
        return self._tokens[self._pos]

    def _advance(self) -> Token:
        token = self._current
        self._pos += 1
        return token

    def _accept(self, *ops: str) -> Token | None:
        token = self._current
        if token.kind == 'op' and token.text in ops:
            return self._advance()
        return None

    def _expect(self, op: str) -> Token:
        token = self._accept(op)
        if token is None:
            raise ExprSyntaxError(
                f'expected {op!r}, got {self._describe(self._current)}',
                self._current.offset,
            )
        return token

    @staticmethod
    def _describe(token: Token) -> str:
        return 'end of input' if token.kind == 'end' else repr(token.text)

    def parse(self) -> Node:
        node = self._expr()
        if self._current.kind != 'end':
            raise ExprSyntaxError(
                f'unexpected {self._describe(self._current)}',
                self._current.offset,
            )
        return node

    def _expr(self) -> Node:
        node = self._term()
        while token := self._accept('+', '-'):
            node = Binary(token.text, node, self._term(), token.offset)
        return node

    def _term(self) -> Node:
        node = self._unary()
        while token := self._accept('*', '/'):
            node = Binary(token.text, node, self._unary(), token.offset)
        return node

    def _unary(self) -> Node:
        if token := self._accept('-'):
            return Unary('neg', self._unary(), token.offset)
        return self._power()

    def _power(self) -> Node:
        node = self._primary()
        if token := self._accept('^'):
            return Binary('^', node, self._unary(), token.offset)
        return node

    def _primary(self) -> Node:
        token = self._current
        if token.kind == 'num':
            self._advance()
            return Num(float(token.text), token.offset)
        if token.kind == 'ident':
            self._advance()
            if self._accept('('):
                return self._call(token)
            return self._variable(token)
        if self._accept('('):
            node = self._expr()
            self._expect(')')
            return node
        raise ExprSyntaxError(f'unexpected {self._describe(token)}', token.offset)

    def _call(self, name: Token) -> Node:
        if name.text not in FUNCTION_ARITY:
            raise ExprNameError(f'unknown function {name.text!r}', name.offset)
        args = []
        if not self._accept(')'):
            args.append(self._expr())
            while self._accept(','):
                args.append(self._expr())
            self._expect(')')
        arity = FUNCTION_ARITY[name.text]
        if len(args) != arity:
            raise ExprArityError(
                f'{name.text} takes {arity} argument(s), got {len(args)}',
                name.offset,
            )
        if arity == 1:
            return Unary(name.text, args[0], name.offset)
        return Call(name.text, tuple(args), name.offset)

    @staticmethod
    def _variable(token: Token) -> Node:
        if match := _COORD.match(token.text):
            return Var(match.group(1), int(match.group(2)), token.offset)
        if match := _ABS2.match(token.text):
            return Var('z_abs2', int(match.group(1)), token.offset)
        if token.text in CONSTANTS:
            return Num(CONSTANTS[token.text], token.offset)
        raise ExprNameError(f'unknown identifier {token.text!r}', token.offset)


def _walk(node: Node) -> typing.Iterator[Node]:
    yield node
    match node:
        case Unary(operand=operand):
            yield from _walk(operand)
        case Binary(left=left, right=right):
            yield from _walk(left)
            yield from _walk(right)
        case Call(args=args):
            for arg in args:
                yield from _walk(arg)


def to_source(node: Node) -> str:
    """Canonical, fully parenthesized source of a node"""
    match node:
        case Num(value=value):
            return repr(float(value))
        case Var(kind='z_abs2', index=index):
            return f'z_abs2_{index}'
        case Var(kind=kind, index=index):
            return f'{kind}{index}'
        case Unary(op='neg', operand=operand):
            return f'(-{to_source(operand)})'
        case Unary(op=op, operand=operand):
            return f'{op}({to_source(operand)})'
        case Binary(op=op, left=left, right=right):
            return f'({to_source(left)} {op} {to_source(right)})'
        case Call(name=name, args=args):
            return f'{name}({", ".join(to_source(a) for a in args)})'
    raise TypeError(f'not an expression node: {node!r}')


@dataclass(frozen=True)
class ExprAst:
    """A parsed expression and the source it came from"""
    root: Node
    source: str = field(default='', compare=False)

    @property
    def dimension(self) -> int:
        """Largest axis index referenced, 0 for constants"""
        return max(
            (n.index for n in _walk(self.root) if isinstance(n, Var)),
            default=0,
        )

    def canonical(self) -> str:
        """Canonical printed form; parsing it gives an equal ExprAst"""
        return to_source(self.root)

    def __str__(self):
        return self.canonical()


def parse(src: str) -> ExprAst:
    """Parse expression source text"""
    ast = ExprAst(_Parser(src).parse(), src)
    logger.debug('parsed %r as %s', src, ast.canonical())
    return ast


def _first_bad(bad: np.ndarray) -> str:
    if bad.ndim == 0:
        return ''
    return f' at point {np.unravel_index(np.argmax(bad), bad.shape)}'


def _eval(node: Node, point: np.ndarray):
    match node:
        case Num(value=value):
            return np.float64(value)
        case Var(kind=kind, index=index):
            if 2 * index > point.shape[0]:
                raise ExprNameError(
                    f'{to_source(node)} needs {2 * index} coordinates, point '
                    f'has {point.shape[0]}',
                    node.offset,
                )
            x = point[2 * index - 2]
            y = point[2 * index - 1]
            match kind:
                case 'x':
                    return x
                case 'y':
                    return y
            return x * x + y * y
        case Unary(op=op, operand=operand):
            value = _eval(operand, point)
            match op:
                case 'neg':
                    return -value
                case 'exp':
                    return np.exp(value)
                case 'abs':
                    return np.abs(value)
            bad = ~(value > 0)
            if np.any(bad):
                raise ExprDomainError(
                    f'log of a non-positive value{_first_bad(bad)}',
                    node.offset,
                )
            return np.log(value)
        case Binary(op=op, left=left, right=right):
            lhs = _eval(left, point)
            rhs = _eval(right, point)
            match op:
                case '+':
                    return lhs + rhs
                case '-':
                    return lhs - rhs
                case '*':
                    return lhs * rhs
                case '/':
                    bad = np.broadcast_to(rhs == 0, np.broadcast(lhs, rhs).shape)
                    if np.any(bad):
                        raise ExprDomainError(
                            f'division by zero{_first_bad(bad)}', node.offset,
                        )
                    return lhs / rhs
            value = np.power(lhs, rhs)
            bad = np.isnan(value) & ~np.isnan(lhs) & ~np.isnan(rhs)
            if np.any(bad):
                raise ExprDomainError(
                    f'power with a negative base and fractional exponent'
                    f'{_first_bad(bad)}',
                    node.offset,
                )
            return value
        case Call(name=name, args=(first, second)):
            reduce = np.maximum if name == 'max' else np.minimum
            return reduce(_eval(first, point), _eval(second, point))
    raise TypeError(f'not an expression node: {node!r}')


def evaluate(ast: ExprAst, point) -> typing.Any:
    """Evaluate at a real point (x1, y1, ..., xn, yn).

    `point` may carry trailing batch dims, shape (2n, ...); the result then
    has the batch shape.
    """
    point = np.asarray(point, dtype=float)
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        value = np.broadcast_to(_eval(ast.root, point), point.shape[1:])
    if point.ndim == 1:
        return float(value)
    return np.array(value, dtype=float)


def real_point(z: typing.Sequence[complex] | np.ndarray) -> np.ndarray:
    """Complex coordinates (n, ...) as real coordinates (2n, ...)"""
    z = np.asarray(z, dtype=complex)
    out = np.empty((2 * z.shape[0],) + z.shape[1:], dtype=float)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def as_complex_function(ast: ExprAst) -> typing.Callable[..., np.ndarray]:
    """The expression as a function of complex coordinates z1, ..., zn"""
    def fn(*z):
        arrays = np.broadcast_arrays(*[np.asarray(c, dtype=complex) for c in z])
        return evaluate(ast, real_point(np.stack(arrays)))
    return fn
