"""Symbolic values carried on nets.

Values are free constructor terms over the product's input atoms. Two
values are equal exactly when they are structurally identical, so
``enc(key, msg)`` produced by two healthy encryptors compares equal, while
an encrypted term never equals a raw input atom.
"""

from __future__ import annotations

import re
import threading
import weakref
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Atom",
    "NullValue",
    "NULL",
    "Term",
    "Value",
    "equals",
    "render",
    "atoms_of",
    "parse_value",
]


@dataclass(frozen=True)
class Atom:
    """The value presented on a product input port."""

    source: str


@dataclass(frozen=True)
class NullValue:
    pass


NULL = NullValue()


class Term:
    """Uninterpreted constructor applied to one or more values.

    Terms are hash-consed: building a term equal to a live one returns the
    existing object, so comparing terms that share structure stays cheap.
    Equality still falls back to a structural check, so correctness never
    depends on the interning table.
    """

    __slots__ = ("constructor", "args", "_hash", "__weakref__")
    _table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __new__(cls, constructor: str, args: tuple[Value, ...]):
        args = tuple(args)
        if not args:
            raise ValueError(f"term {constructor!r} needs at least one argument")
        key = (constructor, args)
        with cls._lock:
            found = cls._table.get(key)
            if found is not None:
                return found
            self = object.__new__(cls)
            object.__setattr__(self, "constructor", constructor)
            object.__setattr__(self, "args", args)
            object.__setattr__(self, "_hash", hash(key))
            cls._table[key] = self
            return self

    def __setattr__(self, name, value):
        raise AttributeError("Term is immutable")

    def __reduce__(self):
        return (Term, (self.constructor, self.args))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.constructor == other.constructor
            and self.args == other.args
        )

    def __repr__(self):
        return f"Term({self.constructor!r}, {self.args!r})"


Value = Union[Atom, NullValue, Term]


def equals(a: Value, b: Value) -> bool:
    # dataclass eq recurses through the args tuples; tuple comparison
    # short-circuits on identical sub-objects, so shared subterms are cheap.
    return a == b


def render(v: Value) -> str:
    if isinstance(v, Atom):
        return v.source
    if isinstance(v, NullValue):
        return "null"
    return f"{v.constructor}({', '.join(render(a) for a in v.args)})"


def atoms_of(v: Value) -> frozenset[str]:
    """Names of every input atom occurring anywhere inside ``v``."""
    found: set[str] = set()
    stack = [v]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Atom):
            found.add(cur.source)
        elif isinstance(cur, Term):
            stack.extend(cur.args)
    return frozenset(found)


_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\S")


def parse_value(text: str) -> Value:
    """Inverse of :func:`render`.

    Used when reading counterexamples back from JSON reports.
    """
    tokens = _TOKEN.findall(text)

    def value(i: int) -> tuple[Value, int]:
        if i >= len(tokens):
            raise ValueError(f"unexpected end of value {text!r}")
        tok = tokens[i]
        if not (tok[0].isalpha() or tok[0] == "_"):
            raise ValueError(f"unexpected {tok!r} in value {text!r}")
        if tok == "null":
            return NULL, i + 1
        if i + 1 < len(tokens) and tokens[i + 1] == "(":
            args = []
            i += 2
            while True:
                arg, i = value(i)
                args.append(arg)
                if i < len(tokens) and tokens[i] == ",":
                    i += 1
                    continue
                if i < len(tokens) and tokens[i] == ")":
                    return Term(tok, tuple(args)), i + 1
                raise ValueError(f"expected ',' or ')' in value {text!r}")
        return Atom(tok), i + 1

    result, end = value(0)
    if end != len(tokens):
        raise ValueError(f"trailing input in value {text!r}")
    return result
