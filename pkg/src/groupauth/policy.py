"""Boolean policy expressions over named key holders.

Concrete syntax::

    expr  := term ("or" term)*
    term  := factor ("and" factor)*
    factor:= "not" factor | NAME | "(" expr ")"

`&`, `|` and `!` are accepted as aliases for `and`, `or` and `not`.
NAME is [A-Za-z_][A-Za-z0-9_]*. Precedence is not > and > or; `and`/`or`
chains are flattened into n-ary nodes.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import GroupAuthError

__all__ = [
    "Var",
    "And",
    "Or",
    "Not",
    "PolicyExpr",
    "PolicyError",
    "ParseError",
    "UnknownHolder",
    "MAX_UNIVERSE",
    "check_universe",
    "parse",
    "render",
    "evaluate",
    "is_monotone",
    "variables",
    "authorized_family",
    "minimal_sets",
]

MAX_UNIVERSE = 20  # family enumeration is 2^|universe|


class PolicyError(GroupAuthError):
    pass


class ParseError(PolicyError):
    """Syntax error; `position` is the 0-based offset into the source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownHolder(PolicyError):
    """An identifier in the policy is not a declared holder name."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class And:
    children: tuple["PolicyExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise PolicyError("and-node needs at least 2 children")


@dataclass(frozen=True)
class Or:
    children: tuple["PolicyExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise PolicyError("or-node needs at least 2 children")


@dataclass(frozen=True)
class Not:
    child: "PolicyExpr"


PolicyExpr = Var | And | Or | Not


def check_universe(universe: Sequence[str]) -> tuple[str, ...]:
    """Validate a holder universe: non-empty, distinct, bounded, sane names."""
    names = tuple(universe)
    if not names:
        raise PolicyError("universe must not be empty")
    if len(names) > MAX_UNIVERSE:
        raise PolicyError(f"universe larger than {MAX_UNIVERSE} holders")
    if len(set(names)) != len(names):
        raise PolicyError("universe contains duplicate names")
    for name in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise PolicyError(f"invalid holder name: {name!r}")
    return names


_TOKEN_RE = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[()&|!]))")
_KEYWORDS = {"and": "and", "or": "or", "not": "not"}
_ALIASES = {"&": "and", "|": "or", "!": "not"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Returns (kind, value, position) triples; kind is 'name', 'op' or 'end'."""
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}",
                             len(text) - len(stripped))
        start = match.start("name") if match.group("name") else match.start("op")
        if match.group("name"):
            word = match.group("name")
            if word in _KEYWORDS:
                tokens.append(("op", word, start))
            else:
                tokens.append(("name", word, start))
        else:
            sym = match.group("op")
            tokens.append(("op", _ALIASES.get(sym, sym), start))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], universe: tuple[str, ...]):
        self._tokens = tokens
        self._index = 0
        self._universe = set(universe)

    @property
    def token(self) -> tuple[str, str, int]:
        return self._tokens[self._index]

    def advance(self) -> None:
        self._index += 1

    def expect_op(self, value: str) -> None:
        kind, val, pos = self.token
        if kind != "op" or val != value:
            raise ParseError(f"expected {value!r}", pos)
        self.advance()

    def parse_expr(self) -> PolicyExpr:
        children = [self.parse_term()]
        while self.token[:2] == ("op", "or"):
            self.advance()
            children.append(self.parse_term())
        if len(children) == 1:
            return children[0]
        flat: list[PolicyExpr] = []
        for child in children:
            flat.extend(child.children if isinstance(child, Or) else [child])
        return Or(tuple(flat))

    def parse_term(self) -> PolicyExpr:
        children = [self.parse_factor()]
        while self.token[:2] == ("op", "and"):
            self.advance()
            children.append(self.parse_factor())
        if len(children) == 1:
            return children[0]
        flat: list[PolicyExpr] = []
        for child in children:
            flat.extend(child.children if isinstance(child, And) else [child])
        return And(tuple(flat))

    def parse_factor(self) -> PolicyExpr:
        kind, value, pos = self.token
        if kind == "op" and value == "not":
            self.advance()
            return Not(self.parse_factor())
        if kind == "op" and value == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        if kind == "name":
            if value not in self._universe:
                raise UnknownHolder(f"unknown holder {value!r} (at position {pos})")
            self.advance()
            return Var(value)
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {value!r}", pos)


def parse(text: str, universe: Sequence[str]) -> PolicyExpr:
    """Parse policy text over the given universe of holder names."""
    names = check_universe(universe)
    parser = _Parser(_tokenize(text), names)
    expr = parser.parse_expr()
    kind, value, pos = parser.token
    if kind != "end":
        raise ParseError(f"trailing input {value!r}", pos)
    return expr


def render(expr: PolicyExpr) -> str:
    """Canonical text form with minimal parentheses; reparses to an equal AST."""

    def go(node: PolicyExpr, parent_prec: int) -> str:
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Not):
            return "not " + go(node.child, 3)
        if isinstance(node, And):
            text = " and ".join(go(c, 2) for c in node.children)
            prec = 2
        else:
            text = " or ".join(go(c, 1) for c in node.children)
            prec = 1
        return f"({text})" if prec < parent_prec else text

    return go(expr, 0)


def evaluate(expr: PolicyExpr, present: Iterable[str]) -> bool:
    """Standard Boolean semantics; Var(x) is true iff x is present."""
    members = frozenset(present)

    def go(node: PolicyExpr) -> bool:
        if isinstance(node, Var):
            return node.name in members
        if isinstance(node, And):
            return all(go(c) for c in node.children)
        if isinstance(node, Or):
            return any(go(c) for c in node.children)
        return not go(node.child)

    return go(expr)


def is_monotone(expr: PolicyExpr) -> bool:
    """Syntactic check: true iff the AST contains no NOT node."""
    if isinstance(expr, Var):
        return True
    if isinstance(expr, Not):
        return False
    return all(is_monotone(c) for c in expr.children)


def variables(expr: PolicyExpr) -> tuple[str, ...]:
    """Holder names mentioned in the expression, in first-mention order."""
    seen: dict[str, None] = {}

    def go(node: PolicyExpr) -> None:
        if isinstance(node, Var):
            seen.setdefault(node.name)
        elif isinstance(node, Not):
            go(node.child)
        else:
            for c in node.children:
                go(c)

    go(expr)
    return tuple(seen)


def authorized_family(
    expr: PolicyExpr,
    universe: Sequence[str],
    max_size: int | None = None,
) -> frozenset[frozenset[str]]:
    """All non-empty subsets of the universe that satisfy the policy.

    Exhaustive enumeration, optionally capped at groups of `max_size`
    members. A size cap is the only way to express seat-count style limits;
    the expression language alone cannot.
    """
    names = check_universe(universe)
    limit = len(names) if max_size is None else min(max_size, len(names))
    family = set()
    for size in range(1, limit + 1):
        for combo in itertools.combinations(names, size):
            if evaluate(expr, combo):
                family.add(frozenset(combo))
    return frozenset(family)


def minimal_sets(family: Iterable[frozenset[str]]) -> frozenset[frozenset[str]]:
    """Members of the family with no proper subset also in the family."""
    groups = set(family)
    return frozenset(
        g for g in groups
        if not any(other < g for other in groups)
    )
