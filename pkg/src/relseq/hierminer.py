"""Hierarchical refinement of frequent type-patterns.

For one type-pattern every occurrence is flattened into its concept-aware
array. Each slot concept expands to its non-root ancestors, giving
(concept, slot) items; a row per occurrence holds its items. Maximal
itemsets, with support counted over distinct *sequences* rather than rows,
become the most specific frequent refinements.

Row sets are Python ints used as bitsets (bit r = occurrence row r).
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence as Seq

from .model import RefinedPattern, Schema, Sequence, Slot, TypePattern, concept_flatten, slot_layout
from .typeminer import FrequentTypePattern

__all__ = [
    "Vocabulary",
    "OccurrenceMatrix",
    "RefinementResult",
    "flatten_occurrences",
    "build_vocabulary",
    "build_occurrence_matrix",
    "sequence_support",
    "mine_maximal_refinements",
    "itemset_to_pattern",
    "refine_all",
]


@dataclass
class Vocabulary:
    items: list[tuple[str, int]]  # (concept, 1-based slot)
    index: dict[tuple[str, int], int]

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class OccurrenceMatrix:
    rows: list  # Occurrence per row, same order as the type-pattern's occurrences
    item_rows: list[int]  # bitset of rows per vocabulary item
    seq_of_row: list[str]
    # exclusive end row of the block of rows sharing row r's sequence
    _block_end: list[int] = field(default_factory=list, repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def support(self, rows: int) -> int:
        """Number of distinct sequences among the rows set in ``rows``."""
        n = 0
        ends = self._block_end
        while rows:
            r = (rows & -rows).bit_length() - 1
            n += 1
            rows >>= ends[r]
            rows <<= ends[r]
        return n

    @property
    def all_rows(self) -> int:
        return (1 << len(self.rows)) - 1


@dataclass
class RefinementResult:
    base: TypePattern
    refinements: list[tuple[RefinedPattern, int]]


def flatten_occurrences(
    ftp: FrequentTypePattern, seqs: Mapping[str, Sequence], schema: Schema
) -> tuple[tuple[Slot, ...], list[tuple[str, ...]]]:
    layout = slot_layout(ftp.pattern, schema)
    return layout, [concept_flatten(seqs[o.seq_id], o.lam, layout) for o in ftp.occurrences]


def build_vocabulary(
    ftp: FrequentTypePattern,
    seqs: Mapping[str, Sequence],
    schema: Schema,
    relationship_only: bool = False,
    flat: tuple[tuple[Slot, ...], list[tuple[str, ...]]] | None = None,
) -> Vocabulary:
    """All (non-root ancestor, slot) pairs seen across the occurrences."""
    layout, rows = flat if flat is not None else flatten_occurrences(ftp, seqs, schema)
    active = [j for j, s in enumerate(layout) if not (relationship_only and s.kind == "event")]
    seen: set[tuple[str, int]] = set()
    for row in rows:
        for j in active:
            tax = layout[j].taxonomy
            for a in tax.ancestors_excluding_root(row[j]):
                seen.add((a, j + 1))
    items = sorted(seen, key=lambda it: (it[1], layout[it[1] - 1].taxonomy.rank[it[0]]))
    return Vocabulary(items, {it: i for i, it in enumerate(items)})


def build_occurrence_matrix(
    ftp: FrequentTypePattern,
    vocab: Vocabulary,
    seqs: Mapping[str, Sequence],
    schema: Schema,
    flat: tuple[tuple[Slot, ...], list[tuple[str, ...]]] | None = None,
) -> OccurrenceMatrix:
    layout, rows = flat if flat is not None else flatten_occurrences(ftp, seqs, schema)
    cols = [0] * len(vocab)
    index = vocab.index
    slots_used = sorted({j for _, j in vocab.items})
    for r, row in enumerate(rows):
        bit = 1 << r
        for j in slots_used:
            for a in layout[j - 1].taxonomy.ancestors_excluding_root(row[j - 1]):
                h = index.get((a, j))
                if h is not None:
                    cols[h] |= bit
    seq_of_row = [o.seq_id for o in ftp.occurrences]
    ends = [0] * len(seq_of_row)
    end = len(seq_of_row)
    for r in range(len(seq_of_row) - 1, -1, -1):
        if r + 1 < len(seq_of_row) and seq_of_row[r + 1] != seq_of_row[r]:
            end = r + 1
        ends[r] = end
    blocks = [sid for r, sid in enumerate(seq_of_row) if r == 0 or sid != seq_of_row[r - 1]]
    if len(blocks) != len(set(blocks)):
        raise ValueError("occurrences must be grouped by sequence")
    return OccurrenceMatrix(list(ftp.occurrences), cols, seq_of_row, ends)


def sequence_support(item_rows: Iterable[Iterable[int]], seq_of_row: Seq[str]) -> int:
    """Distinct sequences among the rows common to every given row set.

    With no row sets every row counts.
    """
    common: set[int] | None = None
    for rs in item_rows:
        rs = set(rs)
        common = rs if common is None else common & rs
    if common is None:
        common = set(range(len(seq_of_row)))
    return len({seq_of_row[r] for r in common})


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mine_maximal_refinements(matrix: OccurrenceMatrix, theta: int) -> list[tuple[int, ...]]:
    """Maximal itemsets whose rows span at least ``theta`` sequences.

    Depth-first backtracking over items in vocabulary order. Extensions
    whose row set equals the current one are absorbed directly (identical
    rows, so identical support). Support equality at the sequence level
    is never used as a shortcut: it does not imply equal row sets.
    """
    support = matrix.support
    first = [(h, rows) for h, rows in enumerate(matrix.item_rows) if support(rows) >= theta]
    maximal: list[int] = []  # itemsets as bitmasks over item ordinals

    def covered(mask: int) -> bool:
        return any(mask & ~m == 0 for m in maximal)

    def backtrack(current: int, cands: list[tuple[int, int]]) -> None:
        for pos, (x, xrows) in enumerate(cands):
            tail = cands[pos + 1 :]
            head = current | (1 << x)
            look = head
            for y, _ in tail:
                look |= 1 << y
            if covered(look):
                return
            nxt = []
            for y, yrows in tail:
                r = xrows & yrows
                if r == xrows:
                    head |= 1 << y
                elif support(r) >= theta:
                    nxt.append((y, r))
            if nxt:
                backtrack(head, nxt)
            elif not covered(head):
                maximal.append(head)

    backtrack(0, first)
    return sorted(tuple(_bits(m)) for m in maximal)


def itemset_to_pattern(
    itemset: Iterable[int], ftp: FrequentTypePattern, vocab: Vocabulary, schema: Schema
) -> RefinedPattern:
    """Most specific concept per slot; root where the itemset says nothing."""
    layout = slot_layout(ftp.pattern, schema)
    slots = [s.taxonomy.root for s in layout]
    for h in itemset:
        c, j = vocab.items[h]
        tax = layout[j - 1].taxonomy
        cur = slots[j - 1]
        if tax.subsumes(cur, c):
            slots[j - 1] = c
        elif not tax.subsumes(c, cur):
            raise ValueError(f"incomparable concepts {cur!r} and {c!r} on slot {j}")
    return RefinedPattern(ftp.pattern, tuple(slots))


def refine_one(
    ftp: FrequentTypePattern,
    seqs: Mapping[str, Sequence],
    schema: Schema,
    theta: int,
    relationship_only: bool = False,
) -> RefinementResult:
    flat = flatten_occurrences(ftp, seqs, schema)
    vocab = build_vocabulary(ftp, seqs, schema, relationship_only, flat)
    matrix = build_occurrence_matrix(ftp, vocab, seqs, schema, flat)
    found = []
    for itemset in mine_maximal_refinements(matrix, theta):
        rows = matrix.all_rows
        for h in itemset:
            rows &= matrix.item_rows[h]
        found.append((itemset_to_pattern(itemset, ftp, vocab, schema), matrix.support(rows)))
    if not found:
        found.append((RefinedPattern.all_root(ftp.pattern, schema), ftp.support))
    return RefinementResult(ftp.pattern, found)


_STATE: dict = {}


def _init(seqs, schema, theta, relationship_only):
    _STATE.update(seqs=seqs, schema=schema, theta=theta, rel_only=relationship_only)


def _work(ftp: FrequentTypePattern) -> RefinementResult:
    st = _STATE
    return refine_one(ftp, st["seqs"], st["schema"], st["theta"], st["rel_only"])


def refine_all(
    ftps: Seq[FrequentTypePattern],
    db: Iterable[Sequence],
    schema: Schema,
    theta: int,
    relationship_only: bool = False,
    threads: int = 1,
) -> list[RefinementResult]:
    """Refinements of every frequent type-pattern, in input order."""
    seqs = {s.sid: s for s in db}
    if threads <= 1 or len(ftps) < 2:
        return [refine_one(f, seqs, schema, theta, relationship_only) for f in ftps]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(
        threads, mp_context=ctx, initializer=_init, initargs=(seqs, schema, theta, relationship_only)
    ) as pool:
        return list(pool.map(_work, ftps, chunksize=max(1, len(ftps) // (8 * threads))))
