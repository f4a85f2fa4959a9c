"""All-occurrence enumeration of a type-pattern inside one sequence.

This is the candidate-checking step of the level-wise miner: instead of
stopping at the first embedding it returns every event index vector.
"""

from __future__ import annotations

from collections import Counter
from math import comb
from typing import Iterable, Mapping, NamedTuple

from .model import Sequence, TypePattern

__all__ = [
    "Occurrence",
    "type_multiset",
    "multiset_prune",
    "find_all_occurrences",
    "count_occurrences_bound",
]


class Occurrence(NamedTuple):
    seq_id: str
    lam: tuple[int, ...]  # 1-based, strictly increasing


def type_multiset(types: Iterable[str]) -> Counter:
    return Counter(types)


def multiset_prune(m_seq: Mapping[str, int], m_pat: Mapping[str, int]) -> bool:
    """True when the sequence lacks some type the pattern needs."""
    return any(m_seq.get(t, 0) - c < 0 for t, c in m_pat.items())


def _suffix_counts(ids: list[int], width: int) -> list[list[int]]:
    out = [[0] * width for _ in range(len(ids) + 1)]
    for pos in range(len(ids) - 1, -1, -1):
        row = out[pos + 1][:]
        if ids[pos] >= 0:  # -1: type absent from the pattern
            row[ids[pos]] += 1
        out[pos] = row
    return out


def find_all_occurrences(
    pat: TypePattern,
    seq: Sequence,
    mg: int | None = None,
    mpl: int | None = None,
    limit: int | None = None,
    m_seq: Mapping[str, int] | None = None,
) -> list[Occurrence]:
    """Every occurrence of ``pat`` in ``seq``, sorted by index vector.

    The search branches on each sequence position: take the match and move
    both cursors, or skip the sequence event and keep the pattern cursor.
    A pattern event that opens a new transaction makes the sequence cursor
    jump past the next separator; skipping across a separator while the
    pattern stays inside a transaction ends that branch. ``limit`` stops
    after that many (lexicographically smallest) vectors.
    """
    ptypes = pat.events
    K = len(ptypes)
    if K == 0:
        return []
    if m_seq is None:
        m_seq = Counter(seq.types)
    m_pat = Counter(ptypes)
    if multiset_prune(m_seq, m_pat):
        return []

    codes = {t: i for i, t in enumerate(m_pat)}
    width = len(codes)
    stypes = [codes.get(t, -1) for t in seq.types]
    pcodes = [codes[t] for t in ptypes]
    n = len(stypes)
    txn = seq.txn_of
    starts = pat.starts_txn

    # m_L at state (i, j) is seq_rem[j] - pat_rem[i]; negative means hopeless
    seq_rem = _suffix_counts(stypes, width)
    pat_rem = _suffix_counts(pcodes, width)

    next_txn_start = [n] * n
    for pos in range(n - 2, -1, -1):
        next_txn_start[pos] = pos + 1 if txn[pos + 1] != txn[pos] else next_txn_start[pos + 1]

    out: list[tuple[int, ...]] = []
    stack: list[tuple[int, int, tuple[int, ...]]] = [(0, 0, ())]
    while stack:
        i, j, lam = stack.pop()
        if i == K:
            out.append(tuple(x + 1 for x in lam))
            if limit is not None and len(out) >= limit:
                break
            continue
        if j >= n:
            continue
        if lam:
            prev = lam[-1]
            if not starts[i] and txn[j] != txn[prev]:
                continue  # separator in sequence that the pattern does not have
            if mg is not None and j - prev > mg:
                continue
            if mpl is not None and j - lam[0] > mpl:
                continue
        sr, pr = seq_rem[j], pat_rem[i]
        if any(sr[c] < pr[c] for c in range(width)):
            continue

        # skip branch first on the stack so the match branch is explored first
        stack.append((i, j + 1, lam))
        if stypes[j] == pcodes[i]:
            if i + 1 < K and starts[i + 1]:
                nj = next_txn_start[j]
                if nj >= n:
                    continue
            else:
                nj = j + 1
            stack.append((i + 1, nj, lam + (j,)))
    return [Occurrence(seq.sid, lam) for lam in sorted(out)]


def count_occurrences_bound(n: int, k: int, g: int | None = None, w: int | None = None) -> int:
    """Analytic upper bound on the number of occurrences (diagnostics only).

    The gap and window bounds are only applied where they are defined
    (``n > k``, and ``n > w > k`` for the window); they are not tight.
    """
    if not n >= k >= 1:
        raise ValueError("need n >= k >= 1")
    bounds = [comb(n, k)]
    if g is not None and n > k:
        bounds.append(max(g - 1, 0) ** (k - 1) * (n - k))
    if w is not None and n > w > k:
        bounds.append(comb(w, k - 1) * (n - k))
    return min(bounds)
