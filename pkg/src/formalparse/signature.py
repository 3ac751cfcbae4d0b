"""Typing context for formal terms: constants, free variables, coercions."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import FormalParseError, SignatureError
from .types import (
    TypeExpr,
    TypeScheme,
    constructor_arities,
    ftv,
    is_fun,
    parse_type,
    render_type,
)

# '@' separates lexical heads in labels, '|' marks binarization labels
RESERVED_CHARS = "@|"
_LINE_RE = re.compile(r"^(const|var)\s+(\S+)\s*:\s*(.+?)\s*$")


@dataclass(frozen=True)
class Coercion:
    name: str
    dom: TypeExpr
    cod: TypeExpr


@dataclass
class Signature:
    consts: dict[str, TypeScheme] = field(default_factory=dict)
    vars: dict[str, TypeExpr] = field(default_factory=dict)
    coercions: tuple[str, ...] = ()

    def __post_init__(self):
        self.consts = dict(self.consts)
        self.vars = dict(self.vars)
        self.coercions = tuple(self.coercions)
        self._validate()

    def _validate(self) -> None:
        both = set(self.consts) & set(self.vars)
        if both:
            raise SignatureError(f"names declared both const and var: {sorted(both)}")
        for name in list(self.consts) + list(self.vars):
            if any(ch in name for ch in RESERVED_CHARS):
                raise SignatureError(f"symbol {name!r} contains a reserved character")
        arities: dict[str, int] = {}
        for scheme in self.consts.values():
            constructor_arities(scheme.body, arities)
        for t in self.vars.values():
            constructor_arities(t, arities)
        self.arities = arities
        seen = set()
        for c in self.coercions:
            if c in seen:
                raise SignatureError(f"coercion {c!r} declared twice")
            seen.add(c)
            if c not in self.consts:
                raise SignatureError(f"coercion {c!r} is not a declared constant")
            body = self.consts[c].body
            if not is_fun(body) or ftv(body):
                raise SignatureError(f"coercion {c!r} must have a ground function type")

    @property
    def coercion_table(self) -> list[Coercion]:
        out = []
        for c in self.coercions:
            body = self.consts[c].body
            out.append(Coercion(c, body.args[0], body.args[1]))
        return out

    def declares(self, name: str) -> bool:
        return name in self.consts or name in self.vars

    def type_arities(self) -> dict[str, int]:
        return dict(self.arities)

    @classmethod
    def build(cls, consts: Mapping[str, str | TypeExpr] = (), vars: Mapping[str, str | TypeExpr] = (),
              coercions: Sequence[str] = ()) -> Signature:
        """Convenience constructor taking types as text."""
        def as_type(t):
            return parse_type(t) if isinstance(t, str) else t
        return cls({k: TypeScheme.close(as_type(v)) for k, v in dict(consts).items()},
                   {k: as_type(v) for k, v in dict(vars).items()},
                   tuple(coercions))

    def dumps(self) -> str:
        lines = [f"const {k} : {render_type(v.body, canonical=False)}" for k, v in self.consts.items()]
        lines += [f"var {k} : {render_type(v, canonical=False)}" for k, v in self.vars.items()]
        lines += [f"coercion {c}" for c in self.coercions]
        return "\n".join(lines) + "\n"


def parse_signature(text: str) -> Signature:
    consts: dict[str, TypeExpr] = {}
    vars_: dict[str, TypeExpr] = {}
    coercions: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("coercion"):
                parts = line.split()
                if len(parts) != 2 or parts[0] != "coercion":
                    raise SignatureError("expected 'coercion <name>'")
                coercions.append(parts[1])
                continue
            m = _LINE_RE.match(line)
            if not m:
                raise SignatureError(f"unrecognized declaration {line!r}")
            kind, name, tytext = m.groups()
            table = consts if kind == "const" else vars_
            if name in consts or name in vars_:
                raise SignatureError(f"{name!r} declared twice")
            table[name] = parse_type(tytext)
        except FormalParseError as exc:
            raise SignatureError(f"line {lineno}: {exc}") from exc
    return Signature.build(consts, vars_, coercions)


def load_signature(path: str | Path) -> Signature:
    return parse_signature(Path(path).read_text(encoding="utf-8"))

