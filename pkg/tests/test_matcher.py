import random
from itertools import combinations
from math import comb

import pytest
from hypothesis import given, strategies as st

from desk import random_db, random_schema
from relseq.matcher import (
    count_occurrences_bound,
    find_all_occurrences,
    multiset_prune,
    type_multiset,
)
from relseq.model import Event, TypePattern, make_sequence, parse_sequence_db


def one_txn(schema, types, sid="s"):
    return make_sequence(sid, [[Event(t) for t in types]], None, schema)


def lams(pat, seq, **kw):
    return [o.lam for o in find_all_occurrences(TypePattern.parse(pat), seq, **kw)]


def test_multiset_prune():
    assert not multiset_prune({"a": 2, "b": 1}, {"a": 1, "b": 1})
    assert multiset_prune({"a": 2, "b": 0}, {"a": 1, "b": 1})
    assert not multiset_prune({"a": 1}, {})
    assert type_multiset("aab") == {"a": 2, "b": 1}


def test_binomial_count(plain):
    # a transaction cannot repeat an event, so use distinct-looking copies via sequence ids
    s = parse_sequence_db("seq s\ne a\nts\ne a\nts\ne a\nts\ne a\nend\n", plain)[0]
    assert len(lams("a ; a", s)) == 6


def test_separator_mismatch(plain):
    ab = parse_sequence_db("seq s\ne a\ne b\nend\n", plain)[0]
    a_b = parse_sequence_db("seq s\ne a\nts\ne b\nend\n", plain)[0]
    assert lams("a ; b", ab) == []
    assert lams("a b", a_b) == []
    assert lams("a b", ab) == [(1, 2)]


def test_max_gap(plain):
    s = parse_sequence_db("seq s\ne a\nts\ne b\nts\ne a\nend\n", plain)[0]
    assert lams("a ; a", s, mg=1) == []
    assert lams("a ; a", s, mg=2) == [(1, 3)]


def test_max_projected_length(plain):
    s = parse_sequence_db("seq s\ne a\nts\ne a\nts\ne b\nts\ne a\nend\n", plain)[0]
    assert lams("a ; a", s) == [(1, 2), (1, 4), (2, 4)]
    assert lams("a ; a", s, mpl=2) == [(1, 2), (2, 4)]


def test_limit_keeps_smallest(plain):
    s = parse_sequence_db("seq s\ne a\nts\ne a\nts\ne a\nts\ne a\nend\n", plain)[0]
    assert lams("a ; a", s, limit=3) == [(1, 2), (1, 3), (1, 4)]


def test_occurrence_ids(plain):
    s = parse_sequence_db("seq x9\ne a\nend\n", plain)[0]
    (o,) = find_all_occurrences(TypePattern.parse("a"), s)
    assert o.seq_id == "x9" and o.lam == (1,)


@pytest.mark.parametrize("n,k,expected", [(4, 2, 6), (10, 5, 252), (12, 3, 220), (7, 1, 7), (5, 5, 1)])
def test_count_bound_binomial(n, k, expected):
    assert count_occurrences_bound(n, k) == expected


def test_gap_bound_is_only_a_heuristic(plain):
    # ⟨a;a⟩ in ⟨a;a;a;a⟩ with g=2 admits 5 occurrences, above the analytic gap
    # bound; enumeration never consults the bound
    s = parse_sequence_db("seq s\ne a\nts\ne a\nts\ne a\nts\ne a\nend\n", plain)[0]
    assert len(lams("a ; a", s, mg=2)) == 5
    assert count_occurrences_bound(4, 2, g=2) == 2
    assert count_occurrences_bound(6, 3, w=4) == comb(4, 2) * 3


def _naive(pat: TypePattern, seq, mg, mpl):
    ptx = [i for i, tx in enumerate(pat.transactions) for _ in tx]
    out = []
    for lam in combinations(range(1, len(seq.events) + 1), pat.n_events):
        if tuple(seq.types[x - 1] for x in lam) != pat.events:
            continue
        ok = all(
            (seq.txn_of[lam[a] - 1] == seq.txn_of[lam[b] - 1]) == (ptx[a] == ptx[b])
            for a in range(len(lam))
            for b in range(a + 1, len(lam))
        )
        ok = ok and (mg is None or all(lam[i + 1] - lam[i] <= mg for i in range(len(lam) - 1)))
        ok = ok and (mpl is None or lam[-1] - lam[0] <= mpl)
        if ok:
            out.append(lam)
    return out


@st.composite
def pattern_text(draw):
    k = draw(st.integers(1, 4))
    txs = [[]]
    for _ in range(k):
        if txs[-1] and draw(st.booleans()):
            txs.append([])
        txs[-1].append(draw(st.sampled_from("abc")))
    return " ; ".join(" ".join(sorted(tx)) for tx in txs)


@given(
    st.integers(0, 100_000),
    pattern_text(),
    st.sampled_from([None, 1, 2, 3]),
    st.sampled_from([None, 2, 4]),
)
def test_matches_exhaustive_enumeration(seed, pat, mg, mpl):
    rng = random.Random(seed)
    schema = random_schema(rng, n_types=3)
    (s,) = random_db(rng, schema, 1, 9)
    p = TypePattern.parse(pat)
    got = [o.lam for o in find_all_occurrences(p, s, mg, mpl)]
    assert got == _naive(p, s, mg, mpl)


@given(st.integers(1, 12), st.integers(1, 5))
def test_single_type_run_is_binomial(n, k):
    from relseq.model import load_schema

    schema = load_schema("eventtype a\n")
    s = make_sequence("s", [[Event("a")] for _ in range(n)], None, schema)
    pat = TypePattern(tuple(("a",) for _ in range(k)))
    assert len(find_all_occurrences(pat, s)) == comb(n, k)


@given(st.integers(0, 100_000), pattern_text(), st.sampled_from([None, 1, 2]), st.sampled_from([None, 3]))
def test_unique_and_head_tail_monotone(seed, pat, mg, mpl):
    rng = random.Random(seed)
    schema = random_schema(rng, n_types=3)
    (s,) = random_db(rng, schema, 1, 8)
    p = TypePattern.parse(pat)
    got = [o.lam for o in find_all_occurrences(p, s, mg, mpl)]
    assert len(got) == len(set(got))
    if p.n_events > 1:
        for i in (0, p.n_events - 1):
            shorter = find_all_occurrences(p.delete(i), s, mg, mpl)
            assert len(shorter) >= (1 if got else 0)
            # every occurrence restricted to the remaining events is an occurrence
            rest = {o.lam for o in shorter}
            assert all(lam[:i] + lam[i + 1 :] in rest for lam in got)
    if got:
        assert not multiset_prune(type_multiset(s.types), type_multiset(p.events))
