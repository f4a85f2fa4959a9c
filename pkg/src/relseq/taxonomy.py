"""Rooted is-a taxonomies.

A taxonomy file holds one parenthesized prefix tree, e.g.::

    (Any(Tested(Sensitive, Resistant, Intermediate), Not-tested))

The outermost node is the root; children keep their order of appearance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Taxonomy",
    "TaxonomyError",
    "ConceptRef",
    "parse_taxonomy",
    "subsumes_array",
]

_FORBIDDEN = re.compile(r"[\s(),#]")


class TaxonomyError(ValueError):
    pass


@dataclass(frozen=True)
class ConceptRef:
    taxonomy: str
    concept: str


@dataclass(eq=False)
class Taxonomy:
    name: str
    root: str
    parent: dict[str, str | None]
    children: dict[str, list[str]]
    # filled in by __post_init__
    rank: dict[str, int] = field(init=False, repr=False)
    _size: dict[str, int] = field(init=False, repr=False)
    _order: list[str] = field(init=False, repr=False)
    _anc_cache: dict[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        order: list[str] = []
        size: dict[str, int] = {}
        # iterative pre-order, children in stored order
        stack = [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                size[node] = 1 + sum(size[c] for c in self.children[node])
                continue
            order.append(node)
            stack.append((node, True))
            for child in reversed(self.children[node]):
                stack.append((child, False))
        if len(order) != len(self.parent):
            raise TaxonomyError(f"taxonomy {self.name!r} is not a single rooted tree")
        self._order = order
        self.rank = {c: i for i, c in enumerate(order)}
        self._size = size
        self._anc_cache = {}

    # -- queries -----------------------------------------------------------

    def __contains__(self, concept: object) -> bool:
        return concept in self.rank

    def __len__(self) -> int:
        return len(self._order)

    @property
    def concepts(self) -> list[str]:
        """Concepts in pre-order."""
        return list(self._order)

    def leaves(self) -> list[str]:
        return [c for c in self._order if not self.children[c]]

    def _check(self, c: str) -> None:
        if c not in self.rank:
            raise TaxonomyError(f"unknown concept {c!r} in taxonomy {self.name!r}")

    def subsumes(self, a: str, b: str) -> bool:
        """True iff ``a == b`` or ``a`` is a proper ancestor of ``b``."""
        self._check(a)
        self._check(b)
        ra = self.rank[a]
        return ra <= self.rank[b] < ra + self._size[a]

    def ancestors_excluding_root(self, c: str) -> tuple[str, ...]:
        """``c`` and its proper ancestors, nearest first, root left out."""
        hit = self._anc_cache.get(c)
        if hit is not None:
            return hit
        self._check(c)
        out = []
        node: str | None = c
        while node is not None and node != self.root:
            out.append(node)
            node = self.parent[node]
        res = tuple(out)
        self._anc_cache[c] = res
        return res

    def depth(self, c: str) -> int:
        self._check(c)
        return len(self.ancestors_excluding_root(c))

    def traversal_rank(self) -> dict[str, int]:
        return dict(self.rank)

    def descendants(self, c: str) -> list[str]:
        """``c`` and everything below it, in pre-order."""
        self._check(c)
        r = self.rank[c]
        return self._order[r : r + self._size[c]]

    def serialize(self) -> str:
        def emit(node: str) -> str:
            kids = self.children[node]
            if not kids:
                return node
            return node + "(" + ",".join(emit(k) for k in kids) + ")"

        return "(" + emit(self.root) + ")"

    @classmethod
    def from_edges(cls, name: str, root: str, edges: Iterable[tuple[str, str]]) -> "Taxonomy":
        """Build from (parent, child) pairs; child order follows the input."""
        parent: dict[str, str | None] = {root: None}
        children: dict[str, list[str]] = {root: []}
        for p, c in edges:
            for label in (p, c):
                if not label or _FORBIDDEN.search(label):
                    raise TaxonomyError(f"invalid concept label {label!r}")
            if c in parent:
                raise TaxonomyError(f"duplicate concept label {c!r}")
            if p not in parent:
                raise TaxonomyError(f"parent {p!r} of {c!r} not declared before it")
            parent[c] = p
            children[c] = []
            children[p].append(c)
        return cls(name, root, parent, children)


_TOKEN = re.compile(r"\s*(?:([(),])|([^\s(),#]+))")


def _tokenize(text: str) -> list[str]:
    stripped = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    tokens = []
    pos = 0
    n = len(stripped)
    while pos < n:
        m = _TOKEN.match(stripped, pos)
        if m is None:
            if stripped[pos:].strip():
                raise TaxonomyError(f"unexpected character at offset {pos}")
            break
        if m.end() == pos:
            break
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    return tokens


def parse_taxonomy(name: str, text: str) -> Taxonomy:
    """Parse a prefix-tree expression such as ``(Any(=,≠))``."""
    tokens = _tokenize(text)
    if not tokens:
        raise TaxonomyError("empty taxonomy")
    pos = 0

    def expect(tok: str) -> None:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            got = tokens[pos] if pos < len(tokens) else "end of input"
            raise TaxonomyError(f"expected {tok!r}, got {got!r}")
        pos += 1

    def label() -> str:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] in "(),":
            raise TaxonomyError("empty node label")
        lab = tokens[pos]
        pos += 1
        return lab

    parent: dict[str, str | None] = {}
    children: dict[str, list[str]] = {}

    def add(lab: str, par: str | None) -> None:
        if lab in parent:
            raise TaxonomyError(f"duplicate concept label {lab!r}")
        parent[lab] = par
        children[lab] = []
        if par is not None:
            children[par].append(lab)

    # explicit stack instead of recursion: deep taxonomies are legal
    expect("(")
    root = label()
    add(root, None)
    stack = [root]
    closed: set[str] = set()
    while stack:
        if pos >= len(tokens):
            raise TaxonomyError("unbalanced parentheses")
        tok = tokens[pos]
        if tok == "(":
            if stack[-1] in closed:
                raise TaxonomyError(f"second child group for {stack[-1]!r}")
            pos += 1
            lab = label()
            add(lab, stack[-1])
            stack.append(lab)
        elif tok == ",":
            pos += 1
            if len(stack) < 2:
                raise TaxonomyError("sibling list outside a child group")
            stack.pop()
            lab = label()
            add(lab, stack[-1])
            stack.append(lab)
        elif tok == ")":
            pos += 1
            stack.pop()
            if stack:
                closed.add(stack[-1])
        else:
            raise TaxonomyError(f"unexpected label {tok!r}")
    if pos != len(tokens):
        raise TaxonomyError("unbalanced parentheses")
    return Taxonomy(name, root, parent, children)


def subsumes_array(a: Sequence[str], b: Sequence[str], schemas: Sequence[Taxonomy]) -> bool:
    if not (len(a) == len(b) == len(schemas)):
        raise TaxonomyError("concept array length mismatch")
    return all(t.subsumes(x, y) for x, y, t in zip(a, b, schemas))
