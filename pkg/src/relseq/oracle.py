"""Brute-force reference miner for small inputs.

Nothing here reuses the occurrence search, the candidate join or the
itemset search of the main pipeline. Occurrences come from enumerating
every index combination; refinements come from walking the cartesian
product of slot concepts. The walk skips the descendants of an
assignment that is already infrequent (making a slot more specific can
only lose matches), which keeps the product tractable without changing
the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, product
from typing import Iterator, Sequence as Seq

from .model import RefinedPattern, Schema, Sequence, TypePattern, slot_layout

__all__ = [
    "OracleConfig",
    "naive_all_occurrences",
    "all_type_patterns",
    "occurrence_table",
    "brute_force_mine",
]

MAX_EVENTS_PER_SEQ = 8
MAX_TAXONOMY_SIZE = 8
MAX_PATTERN_EVENTS = 4


@dataclass
class OracleConfig:
    min_support: int
    max_gap: int | None = None
    max_projected_length: int | None = None
    max_pattern_events: int = 4
    relationship_only: bool = False


def _type_level_ok(ptx, seq: Sequence, lam: Seq[int], mg, mpl) -> bool:
    """Match predicate on 1-based ``lam``; ``ptx`` is the transaction index of each pattern event."""
    txn = seq.txn_of
    # every pair, not just neighbours
    for a in range(len(lam)):
        for b in range(a + 1, len(lam)):
            if (txn[lam[a] - 1] == txn[lam[b] - 1]) != (ptx[a] == ptx[b]):
                return False
    if mg is not None and any(lam[i + 1] - lam[i] > mg for i in range(len(lam) - 1)):
        return False
    if mpl is not None and lam and lam[-1] - lam[0] > mpl:
        return False
    return True


def naive_all_occurrences(
    pat: TypePattern, seq: Sequence, mg: int | None = None, mpl: int | None = None
) -> list[tuple[int, ...]]:
    """Every strictly increasing index vector that satisfies the match predicate."""
    ptx = [i for i, tx in enumerate(pat.transactions) for _ in tx]
    want = pat.events
    types = seq.types
    out = []
    for lam in combinations(range(1, len(types) + 1), len(want)):
        if tuple(types[x - 1] for x in lam) == want and _type_level_ok(ptx, seq, lam, mg, mpl):
            out.append(lam)
    return out


def _compositions(k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for first in range(1, k + 1):
        for rest in _compositions(k - first):
            yield (first,) + rest


def all_type_patterns(types: Seq[str], max_events: int) -> list[TypePattern]:
    """Every canonical type-pattern with 1..max_events events."""
    types = sorted(types)
    out = []
    for k in range(1, max_events + 1):
        for sizes in _compositions(k):
            per_tx = [list(combinations_with_replacement(types, s)) for s in sizes]
            for txs in product(*per_tx):
                out.append(TypePattern(tuple(txs)))
    return out


def _flat(seq: Sequence, lam, layout) -> tuple[str, ...]:
    vec = []
    for s in layout:
        if s.kind == "event":
            vec.append(seq.events[lam[s.m - 1] - 1].concepts[s.pos])
        else:
            vec.append(seq.rel(lam[s.m - 1], lam[s.k - 1])[s.pos])
    return tuple(vec)


def _check_sizes(db: Seq[Sequence], schema: Schema, cfg: OracleConfig) -> None:
    if cfg.max_pattern_events > MAX_PATTERN_EVENTS:
        raise ValueError(f"oracle supports at most {MAX_PATTERN_EVENTS} pattern events")
    for s in db:
        if len(s.events) > MAX_EVENTS_PER_SEQ:
            raise ValueError(f"oracle supports at most {MAX_EVENTS_PER_SEQ} events per sequence")
    for t in schema.taxonomies.values():
        if len(t) > MAX_TAXONOMY_SIZE:
            raise ValueError(f"taxonomy {t.name!r} too large for the oracle")


OccurrenceTable = dict  # TypePattern -> [(Sequence, [lam, ...]), ...]


def occurrence_table(
    db: Seq[Sequence],
    schema: Schema,
    max_events: int,
    mg: int | None = None,
    mpl: int | None = None,
) -> OccurrenceTable:
    """Naive occurrences of every type-pattern, keeping only sequences that host one.

    Independent of the support threshold and of the scenario, so one table
    can serve several :func:`brute_force_mine` calls.
    """
    table = {}
    for pat in all_type_patterns(schema.type_names, max_events):
        per_seq = []
        for seq in db:
            occ = naive_all_occurrences(pat, seq, mg, mpl)
            if occ:
                per_seq.append((seq, occ))
        table[pat] = per_seq
    return table


def brute_force_mine(
    db: Seq[Sequence],
    schema: Schema,
    cfg: OracleConfig,
    table: OccurrenceTable | None = None,
) -> list[tuple[RefinedPattern, int]]:
    """Maximal frequent refinements of every frequent type-pattern.

    ``table`` must come from :func:`occurrence_table` with the same db,
    max-gap and max-projected-length.
    """
    _check_sizes(db, schema, cfg)
    if table is None:
        table = occurrence_table(
            db, schema, cfg.max_pattern_events, cfg.max_gap, cfg.max_projected_length
        )
    theta = cfg.min_support
    out: list[tuple[RefinedPattern, int]] = []
    for pat, per_seq in table.items():
        if pat.n_events > cfg.max_pattern_events or len(per_seq) < theta:
            continue
        layout = slot_layout(pat, schema)
        # distinct concrete concept vectors per supporting sequence
        vectors = [sorted({_flat(seq, lam, layout) for lam in occ}) for seq, occ in per_seq]
        choices = []
        for s in layout:
            if cfg.relationship_only and s.kind == "event":
                choices.append([s.taxonomy.root])
            else:
                choices.append(s.taxonomy.concepts)

        frequent: dict[tuple[str, ...], int] = {}
        roots = tuple(s.taxonomy.root for s in layout)

        def walk(j: int, prefix: tuple[str, ...], alive: list[list[tuple[str, ...]]]) -> None:
            if j == len(layout):
                frequent[prefix] = len(alive)
                return
            tax = layout[j].taxonomy
            for c in choices[j]:
                kept = []
                for vecs in alive:
                    match = [v for v in vecs if tax.subsumes(c, v[j])]
                    if match:
                        kept.append(match)
                if len(kept) >= theta:
                    walk(j + 1, prefix + (c,), kept)

        walk(0, (), vectors)
        assert frequent.get(roots) == len(per_seq)

        for assign, sup in frequent.items():
            more_specific = False
            for j, c in enumerate(assign):
                if cfg.relationship_only and layout[j].kind == "event":
                    continue
                for child in layout[j].taxonomy.children[c]:
                    if assign[:j] + (child,) + assign[j + 1 :] in frequent:
                        more_specific = True
                        break
                if more_specific:
                    break
            if not more_specific:
                out.append((RefinedPattern(pat, assign), sup))
    out.sort(key=lambda ps: (ps[0].base.sort_key(), ps[0].slots))
    return out
