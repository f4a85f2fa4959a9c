"""Level-wise mining of frequent type-patterns with all their occurrences."""

from __future__ import annotations

import logging
import multiprocessing
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence as Seq

from .matcher import Occurrence, find_all_occurrences
from .model import Schema, Sequence, TypePattern

logger = logging.getLogger(__name__)

__all__ = [
    "MinerConfig",
    "FrequentTypePattern",
    "level1_candidates",
    "join_candidates",
    "prune_candidates",
    "mine_type_patterns",
]


@dataclass
class MinerConfig:
    """Mining parameters. ``None`` means unbounded for the two constraints."""

    min_support: int
    max_gap: int | None = None
    max_projected_length: int | None = None
    max_pattern_events: int = 10
    occ_cap: int | None = None
    ban_uniform_runs: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        for name in ("max_gap", "max_projected_length", "occ_cap"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1 when given")
        if self.max_pattern_events < 1:
            raise ValueError("max_pattern_events must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class FrequentTypePattern:
    pattern: TypePattern
    occurrences: list[Occurrence]
    support: int
    supporting_seq_ids: list[str]
    truncated: bool = False  # occ_cap dropped occurrences somewhere
    # positions of the supporting sequences in the id-sorted database
    seq_index: list[int] = field(default_factory=list, repr=False)


def level1_candidates(schema: Schema) -> list[TypePattern]:
    return [TypePattern(((t,),)) for t in schema.type_names]


def _drop_first(p: TypePattern) -> TypePattern:
    return p.delete(0)


def _drop_last(p: TypePattern) -> TypePattern:
    return p.delete(p.n_events - 1)


def _join_pairs(frequent: Seq[TypePattern]) -> dict[TypePattern, tuple[TypePattern, TypePattern]]:
    """candidate -> (prefix parent, suffix parent), first pair found wins."""
    out: dict[TypePattern, tuple[TypePattern, TypePattern]] = {}
    ordered = sorted(frequent, key=TypePattern.sort_key)
    if not ordered:
        return out
    if ordered[0].n_events == 1:
        for a in ordered:
            for b in ordered:
                x, y = a.events[0], b.events[0]
                if x <= y:
                    out.setdefault(TypePattern(((x, y),)), (a, b))
                out.setdefault(TypePattern(((x,), (y,))), (a, b))
        return out
    by_head: dict[TypePattern, list[TypePattern]] = {}
    for b in ordered:
        by_head.setdefault(_drop_last(b), []).append(b)
    for a in ordered:
        for b in by_head.get(_drop_first(a), ()):
            z = b.events[-1]
            if len(b.transactions[-1]) > 1:
                txs = a.transactions[:-1] + (a.transactions[-1] + (z,),)
            else:
                txs = a.transactions + ((z,),)
            out.setdefault(TypePattern(txs), (a, b))
    return out


def join_candidates(frequent_k_minus_1: Iterable[TypePattern]) -> list[TypePattern]:
    """GSP join: a and b combine when a without its first event equals b without its last."""
    return sorted(_join_pairs(list(frequent_k_minus_1)), key=TypePattern.sort_key)


def _is_uniform_run(p: TypePattern) -> bool:
    return p.n_events >= 3 and len(set(p.events)) == 1


def prune_candidates(
    candidates: Iterable[TypePattern],
    frequent_k_minus_1: Iterable[TypePattern],
    config: MinerConfig,
) -> list[TypePattern]:
    """Apriori pruning.

    With a finite max-gap only the head and tail subpatterns are consulted:
    deleting a middle event can widen a gap past the limit.
    """
    freq = set(frequent_k_minus_1)
    kept = []
    for c in candidates:
        if config.ban_uniform_runs and _is_uniform_run(c):
            continue
        if config.max_gap is None:
            positions: Iterable[int] = range(c.n_events)
        else:
            positions = (0, c.n_events - 1)
        if all(c.delete(i) in freq for i in positions):
            kept.append(c)
    return kept


# -- candidate checking -----------------------------------------------------

_WORKER_STATE: dict = {}


def _init_worker(db, counts, mg, mpl, cap):
    _WORKER_STATE.update(db=db, counts=counts, mg=mg, mpl=mpl, cap=cap)


def _check(task: tuple[TypePattern, list[int]]):
    """Occurrences of one candidate over its allowed sequences."""
    pat, allowed = task
    st = _WORKER_STATE
    db, counts, cap = st["db"], st["counts"], st["cap"]
    limit = cap + 1 if cap is not None else None
    occs: list[Occurrence] = []
    hits: list[int] = []
    truncated = False
    for idx in allowed:
        found = find_all_occurrences(pat, db[idx], st["mg"], st["mpl"], limit, counts[idx])
        if not found:
            continue
        if cap is not None and len(found) > cap:
            found = found[:cap]
            truncated = True
        hits.append(idx)
        occs.extend(found)
    return occs, hits, truncated


class _Checker:
    def __init__(self, db, counts, config: MinerConfig):
        args = (db, counts, config.max_gap, config.max_projected_length, config.occ_cap)
        self._pool = None
        if config.threads > 1:
            ctx = multiprocessing.get_context("fork")
            self._pool = ProcessPoolExecutor(
                config.threads, mp_context=ctx, initializer=_init_worker, initargs=args
            )
        else:
            _init_worker(*args)

    def map(self, tasks):
        if self._pool is None:
            return [_check(t) for t in tasks]
        chunk = max(1, len(tasks) // (8 * self._pool._max_workers))
        return list(self._pool.map(_check, tasks, chunksize=chunk))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def mine_type_patterns(
    db: Seq[Sequence],
    config: MinerConfig,
    schema: Schema | None = None,
    progress: Callable[[int, int, int], None] | None = None,
) -> list[FrequentTypePattern]:
    """All frequent type-patterns with their complete occurrence sets.

    Output is ordered by (event count, pattern elements). ``progress`` is
    called as ``progress(level, n_candidates, n_frequent)``.
    """
    db = sorted(db, key=lambda s: s.sid)
    counts = [Counter(s.types) for s in db]
    theta = config.min_support
    if schema is not None:
        level = level1_candidates(schema)
    else:
        level = [TypePattern(((t,),)) for t in sorted({t for s in db for t in s.types})]
    all_ids = list(range(len(db)))
    tasks = [(c, all_ids) for c in level]

    checker = _Checker(db, counts, config)
    result: list[FrequentTypePattern] = []
    try:
        k = 1
        while tasks:
            frequent: list[FrequentTypePattern] = []
            for (cand, _), (occs, hits, trunc) in zip(tasks, checker.map(tasks)):
                if len(hits) >= theta:
                    frequent.append(
                        FrequentTypePattern(
                            pattern=cand,
                            occurrences=occs,
                            support=len(hits),
                            supporting_seq_ids=[db[i].sid for i in hits],
                            truncated=trunc,
                            seq_index=hits,
                        )
                    )
            logger.info("level %d: %d candidates, %d frequent", k, len(tasks), len(frequent))
            if progress is not None:
                progress(k, len(tasks), len(frequent))
            result.extend(frequent)
            k += 1
            if k > config.max_pattern_events or not frequent:
                break
            by_pat = {f.pattern: f for f in frequent}
            pairs = _join_pairs(list(by_pat))
            kept = prune_candidates(sorted(pairs, key=TypePattern.sort_key), by_pat, config)
            tasks = []
            for cand in kept:
                a, b = pairs[cand]
                ids_b = set(by_pat[b].seq_index)
                allowed = [i for i in by_pat[a].seq_index if i in ids_b]
                if len(allowed) >= theta:
                    tasks.append((cand, allowed))
    finally:
        checker.close()
    result.sort(key=lambda f: f.pattern.sort_key())
    return result
