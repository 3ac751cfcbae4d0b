"""Bracketed trees: reading, writing and yields."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .errors import EmptyChildren, EmptyExpression, StrayToken, UnbalancedParens

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


@dataclass(frozen=True)
class RawTree:
    label: str
    children: tuple[RawTree, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_preterminal(self) -> bool:
        return len(self.children) == 1 and self.children[0].is_leaf

    def __str__(self) -> str:
        return render_sexpr(self)

    def subtrees(self) -> Iterator[RawTree]:
        """Pre-order traversal, the node itself first."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def _read(tokens: list[str], pos: int) -> tuple[RawTree, int]:
    tok = tokens[pos]
    if tok == ")":
        raise UnbalancedParens(f"unexpected ')' at token {pos}")
    if tok != "(":
        return RawTree(tok), pos + 1
    pos += 1
    if pos >= len(tokens):
        raise UnbalancedParens("input ends after '('")
    if tokens[pos] == ")":
        raise EmptyExpression(f"'()' at token {pos - 1}")
    if tokens[pos] == "(":
        raise StrayToken(f"node label expected at token {pos}, found '('")
    label = tokens[pos]
    pos += 1
    children = []
    while True:
        if pos >= len(tokens):
            raise UnbalancedParens(f"missing ')' for node {label!r}")
        if tokens[pos] == ")":
            break
        child, pos = _read(tokens, pos)
        children.append(child)
    if not children:
        raise EmptyChildren(f"internal node {label!r} has no children")
    return RawTree(label, tuple(children)), pos + 1


def parse_sexpr(text: str) -> RawTree:
    """Read exactly one bracketed tree from ``text``.

    A bare token is a leaf. ``(label child ...)`` is an internal node and
    needs at least one child.
    """
    tokens = tokenize(text)
    if not tokens:
        raise EmptyExpression("no expression in input")
    depth = 0
    for tok in tokens:
        depth += (tok == "(") - (tok == ")")
        if depth < 0:
            raise UnbalancedParens("unmatched ')'")
    if depth:
        raise UnbalancedParens(f"{depth} unclosed '('")
    tree, pos = _read(tokens, 0)
    if pos != len(tokens):
        if tokens[pos] == ")":
            raise UnbalancedParens(f"unmatched ')' at token {pos}")
        raise StrayToken(f"trailing content after expression: {tokens[pos]!r}")
    return tree


def render_sexpr(tree: RawTree) -> str:
    parts: list[str] = []

    def walk(node: RawTree) -> None:
        if node.is_leaf:
            parts.append(node.label)
            return
        parts.append("(" + node.label)
        for child in node.children:
            parts.append(" ")
            walk(child)
        parts.append(")")

    walk(tree)
    return "".join(parts)


def tree_yield(tree: RawTree) -> list[str]:
    return [node.label for node in tree.subtrees() if node.is_leaf]
