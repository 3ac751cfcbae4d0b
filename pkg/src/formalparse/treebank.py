"""Typed labeled trees for terms and the line-oriented treebank format.

A treebank file holds one entry per line::

    id <TAB> labeled-tree [<TAB> space-separated tokens]

Blank lines and lines starting with ``#`` are skipped. The optional third
column declares the expected yield and is checked against the tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ArityError, FormalParseError, UnknownSymbol, ValidationError
from .infer import infer_annotated
from .sexpr import RawTree, parse_sexpr, render_sexpr, tree_yield
from .signature import Signature
from .terms import Abs, App, Const, Term, Var, head_symbol, leaves
from .types import TypeExpr, canonicalize, parse_type_label, type_label

BIND = "BIND"
LEX_SEP = "@"
ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class TreebankEntry:
    id: str
    tokens: tuple[str, ...]
    gold_tree: RawTree
    gold_term: Term | None = None


def label_type(label: str, sig: Signature) -> TypeExpr:
    """Decode a node label (lexical suffix ignored) back into a type."""
    return parse_type_label(strip_lex(label), sig.arities)


def strip_lex(label: str) -> str:
    return label.split(LEX_SEP, 1)[0]


def lex_suffix(label: str) -> str:
    i = label.find(LEX_SEP)
    return "" if i < 0 else label[i:]


def label_with_types(term: Term, sig: Signature, lexicalized: bool = False,
                     env: Mapping[str, TypeExpr] | None = None) -> RawTree:
    """Labeled tree whose nodes carry the types of the corresponding subterms.

    Constants and variables become preterminals over their surface token,
    applications binary nodes, abstractions ``(T (BIND v) body)``. With
    ``lexicalized`` internal labels get ``@head`` appended.
    """
    types = infer_annotated(term, sig, env)

    def lab(path) -> str:
        return type_label(canonicalize(types[path]))

    def go(t: Term, path) -> RawTree:
        if isinstance(t, (Const, Var)):
            return RawTree(lab(path), (RawTree(t.name),))
        label = lab(path)
        if lexicalized:
            label += LEX_SEP + head_symbol(t)
        if isinstance(t, App):
            return RawTree(label, (go(t.fun, path + ("f",)), go(t.arg, path + ("a",))))
        return RawTree(label, (RawTree(BIND, (RawTree(t.var),)), go(t.body, path + ("b",))))

    return go(term, ())


def term_of_labeled_tree(tree: RawTree, sig: Signature, free_ok: bool = False) -> Term:
    """Rebuild the term encoded by a labeled tree; labels are not checked.

    Leaves resolve to bound variables, declared constants or declared
    variables in that order. With ``free_ok`` any other token becomes a free
    variable instead of raising UnknownSymbol.
    """

    def leaf(name: str, bound: frozenset) -> Term:
        if name in bound:
            return Var(name)
        if name in sig.consts:
            return Const(name)
        if name in sig.vars or free_ok:
            return Var(name)
        raise UnknownSymbol(f"unknown symbol {name!r}")

    def go(node: RawTree, bound: frozenset) -> Term:
        if node.is_leaf:
            return leaf(node.label, bound)
        if node.is_preterminal:
            return leaf(node.children[0].label, bound)
        if len(node.children) != 2:
            raise ArityError(f"node {node.label!r} has {len(node.children)} children")
        first, second = node.children
        if first.label == BIND:
            if not first.is_preterminal:
                raise ArityError("binder node must dominate exactly one token")
            v = first.children[0].label
            return Abs(v, go(second, bound | {v}))
        return App(go(first, bound), go(second, bound))

    return go(tree, frozenset())


def _parse_line(line: str) -> tuple[str, RawTree, tuple[str, ...] | None]:
    cols = line.rstrip("\n").split("\t")
    if len(cols) not in (2, 3):
        raise FormalParseError(f"expected 2 or 3 tab-separated columns, got {len(cols)}")
    entry_id = cols[0].strip()
    if not ID_RE.match(entry_id):
        raise FormalParseError(f"invalid entry id {entry_id!r}")
    tree = parse_sexpr(cols[1])
    declared = tuple(cols[2].split()) if len(cols) == 3 else None
    return entry_id, tree, declared


def parse_treebank(lines: Iterable[str], sig: Signature | None = None) -> list[TreebankEntry]:
    parsed = []
    errors = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            parsed.append(_parse_line(line))
        except FormalParseError as exc:
            errors.append((lineno, f"{type(exc).__name__}: {exc}"))
    if errors:
        detail = "; ".join(f"line {n}: {msg}" for n, msg in errors)
        raise ValidationError(f"{len(errors)} malformed line(s): {detail}", line_errors=errors)

    entries = []
    seen = set()
    for entry_id, tree, declared in parsed:
        if entry_id in seen:
            raise ValidationError(f"duplicate entry id {entry_id!r}", entry_id)
        seen.add(entry_id)
        tokens = tuple(tree_yield(tree))
        if declared is not None and declared != tokens:
            raise ValidationError(
                f"entry {entry_id!r}: declared tokens {' '.join(declared)!r} "
                f"differ from tree yield {' '.join(tokens)!r}", entry_id)
        gold = None
        if sig is not None and _binary_shape(tree):
            try:
                gold = term_of_labeled_tree(tree, sig)
            except FormalParseError:
                gold = None
            if gold is not None and tuple(leaves(gold)) != tokens:
                raise ValidationError(f"entry {entry_id!r}: term leaves differ from yield", entry_id)
        entries.append(TreebankEntry(entry_id, tokens, tree, gold))
    return entries


def _binary_shape(tree: RawTree) -> bool:
    for node in tree.subtrees():
        if node.is_leaf or node.is_preterminal:
            continue
        if len(node.children) != 2:
            return False
    return True


def load_treebank(path: str | Path, sig: Signature | None = None) -> list[TreebankEntry]:
    with open(path, encoding="utf-8") as fh:
        return parse_treebank(fh, sig)


def format_entry(entry_id: str, tree: RawTree, tokens: Iterable[str] | None = None) -> str:
    line = f"{entry_id}\t{render_sexpr(tree)}"
    if tokens is not None:
        line += "\t" + " ".join(tokens)
    return line


def dump_treebank(entries: Iterable[tuple[str, RawTree]], with_tokens: bool = True) -> str:
    out = [format_entry(i, t, tree_yield(t) if with_tokens else None) for i, t in entries]
    return "\n".join(out) + ("\n" if out else "")
