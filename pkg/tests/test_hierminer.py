import random
from itertools import combinations

from hypothesis import given, strategies as st

from relseq.hierminer import (
    OccurrenceMatrix,
    Vocabulary,
    build_occurrence_matrix,
    build_vocabulary,
    itemset_to_pattern,
    mine_maximal_refinements,
    refine_all,
    sequence_support,
)
from relseq.matcher import Occurrence
from relseq.model import TypePattern, format_pattern, parse_sequence_db, pattern_matches
from relseq.typeminer import MinerConfig, mine_type_patterns


def ftp_for(db, schema, pattern, theta=1):
    for f in mine_type_patterns(db, MinerConfig(theta, max_pattern_events=4), schema):
        if str(f.pattern) == pattern:
            return f
    raise LookupError(pattern)


def seqs(db):
    return {s.sid: s for s in db}


def test_vocabulary_ancestor_closure(clinic):
    db = parse_sequence_db("seq s1\ne B Gram-neg\ne T J01\nr 2 1 Resistant\nend\n", clinic)
    f = ftp_for(db, clinic, "B T")
    vocab = build_vocabulary(f, seqs(db), clinic)
    assert set(vocab.items) == {("Gram-neg", 1), ("J01", 2), ("Resistant", 3), ("Tested", 3)}
    # ordered by slot, then pre-order rank
    assert vocab.items == [("Gram-neg", 1), ("J01", 2), ("Tested", 3), ("Resistant", 3)]
    only_rel = build_vocabulary(f, seqs(db), clinic, relationship_only=True)
    assert only_rel.items == [("Tested", 3), ("Resistant", 3)]


def test_root_contributes_nothing(clinic):
    db = parse_sequence_db("seq s1\ne B Bacteria\ne T J01\nend\n", clinic)
    vocab = build_vocabulary(ftp_for(db, clinic, "B T"), seqs(db), clinic)
    assert vocab.items == [("J01", 2)]


def test_matrix_columns(clinic):
    db = parse_sequence_db(
        "seq s1\ne B E-coli\nts\ne T J01C\nts\ne T L01\nend\n"
        "seq s2\ne B Staph\nts\ne T J01D\nend\n",
        clinic,
    )
    f = ftp_for(db, clinic, "B ; T")
    assert [(o.seq_id, o.lam) for o in f.occurrences] == [("s1", (1, 2)), ("s1", (1, 3)), ("s2", (1, 2))]
    vocab = build_vocabulary(f, seqs(db), clinic)
    m = build_occurrence_matrix(f, vocab, seqs(db), clinic)
    assert m.seq_of_row == ["s1", "s1", "s2"]
    assert m.item_rows[vocab.index[("J01", 2)]] == 0b101
    assert m.support(0b011) == 1 and m.support(0b110) == 2 and m.support(0) == 0


def test_empty_vocabulary_matrix(plain):
    db = parse_sequence_db("seq s1\ne a\nts\ne a\nend\n", plain)
    f = ftp_for(db, plain, "a")
    vocab = build_vocabulary(f, seqs(db), plain)
    m = build_occurrence_matrix(f, vocab, seqs(db), plain)
    assert len(vocab) == 0 and m.item_rows == [] and m.n_rows == 2


def test_sequence_support_examples():
    phi = ["s1", "s1", "s2"]
    assert sequence_support([{0, 1}], phi) == 1
    assert sequence_support([{1, 2}], phi) == 2
    assert sequence_support([{0}, {2}], phi) == 0
    assert sequence_support([], phi) == 2


def _matrix(cols, phi):
    ends = []
    for r in range(len(phi)):
        e = r + 1
        while e < len(phi) and phi[e] == phi[r]:
            e += 1
        ends.append(e)
    rows = [Occurrence(s, (r + 1,)) for r, s in enumerate(phi)]
    return OccurrenceMatrix(rows, cols, phi, ends)


def test_maximal_pair():
    # x and y co-occur in both sequences; z only in one
    m = _matrix([0b0011, 0b0111, 0b1000], ["s1", "s2", "s2", "s3"])
    assert mine_maximal_refinements(m, 2) == [(0, 1)]
    assert mine_maximal_refinements(m, 4) == []


def _brute_maximal(m, theta):
    n = len(m.item_rows)
    freq = []
    for k in range(1, n + 1):
        for iset in combinations(range(n), k):
            rows = m.all_rows
            for h in iset:
                rows &= m.item_rows[h]
            if m.support(rows) >= theta:
                freq.append(frozenset(iset))
    return sorted(tuple(sorted(a)) for a in freq if not any(a < b for b in freq))


@given(st.integers(0, 1_000_000), st.integers(1, 6))
def test_genmax_matches_exhaustive_search(seed, theta):
    rng = random.Random(seed)
    n_rows = 20
    phi = sorted(f"s{rng.randint(0, 7)}" for _ in range(n_rows))
    density = rng.choice([0.3, 0.5, 0.8])
    cols = [sum(1 << r for r in range(n_rows) if rng.random() < density) for _ in range(6)]
    m = _matrix(cols, phi)
    assert mine_maximal_refinements(m, theta) == _brute_maximal(m, theta)
    for iset in mine_maximal_refinements(m, theta):
        rows = m.all_rows
        for h in iset:
            rows &= cols[h]
        assert sequence_support([_bits_set(cols[h]) for h in iset], phi) == m.support(rows)


def _bits_set(mask):
    return {r for r in range(mask.bit_length()) if mask >> r & 1}


def test_itemset_to_pattern(clinic):
    db = parse_sequence_db("seq s1\ne B Gram-neg\ne T J01\nr 2 1 Resistant\nend\n", clinic)
    f = ftp_for(db, clinic, "B T")
    vocab = build_vocabulary(f, seqs(db), clinic)
    iset = [vocab.index[("Tested", 3)], vocab.index[("Resistant", 3)]]
    p = itemset_to_pattern(iset, f, vocab, clinic)
    assert p.slots == ("Bacteria", "Drug", "Resistant")
    assert format_pattern(p, clinic) == "B(Bacteria) T(Drug) | r(2,1)=[Resistant]"
    assert itemset_to_pattern([], f, vocab, clinic).slots == ("Bacteria", "Drug", "Any")


def test_three_event_refinement_shape(clinic):
    # a bug found after two treatments, resistant to the first
    db = parse_sequence_db(
        "seq s1\ne T J01C\nts\ne T L01\nts\ne B E-coli\nr 3 1 Resistant\nend\n", clinic
    )
    f = ftp_for(db, clinic, "T ; T ; B")
    vocab = build_vocabulary(f, seqs(db), clinic)
    iset = [vocab.index[("Gammaproteobacteria", 4)], vocab.index[("Resistant", 5)]]
    p = itemset_to_pattern(iset, f, vocab, clinic)
    assert format_pattern(p, clinic) == "T(Drug) ; T(Drug) ; B(Gammaproteobacteria) | r(3,1)=[Resistant]"


def test_all_rows_identical_gives_only_the_most_specific(clinic):
    text = "".join(f"seq s{i}\ne B E-coli\ne T J01C\nr 2 1 Resistant\nend\n" for i in range(3))
    db = parse_sequence_db(text, clinic)
    ftps = mine_type_patterns(db, MinerConfig(3), clinic)
    res = {str(r.base): r.refinements for r in refine_all(ftps, db, clinic, 3)}
    (only,) = res["B T"]
    assert format_pattern(only[0], clinic) == "B(E-coli) T(J01C) | r(2,1)=[Resistant]"
    assert only[1] == 3


def test_no_frequent_item_falls_back_to_type_pattern(clinic):
    db = parse_sequence_db(
        "seq s1\ne B Bacteria\ne T Drug\nend\nseq s2\ne B Bacteria\ne T Drug\nend\n", clinic
    )
    ftps = mine_type_patterns(db, MinerConfig(2), clinic)
    res = {str(r.base): r.refinements for r in refine_all(ftps, db, clinic, 2)}
    (only,) = res["B T"]
    assert not only[0].is_specialized(clinic) and only[1] == 2


def test_results_follow_type_pattern_order(clinic):
    db = parse_sequence_db("seq s1\ne B E-coli\ne T J01C\nend\n", clinic)
    ftps = mine_type_patterns(db, MinerConfig(1), clinic)
    assert [r.base for r in refine_all(ftps, db, clinic, 1)] == [f.pattern for f in ftps]


def test_refinements_rematch(clinic):
    text = (
        "seq s1\ne B E-coli\ne T J01C\nr 2 1 Resistant\nend\n"
        "seq s2\ne B Klebsiella\ne T J01D\nr 2 1 Sensitive\nend\n"
        "seq s3\ne B Staph\ne T J01C\nr 2 1 Resistant\nend\n"
    )
    db = parse_sequence_db(text, clinic)
    ftps = mine_type_patterns(db, MinerConfig(2), clinic)
    for r in refine_all(ftps, db, clinic, 2):
        pats = [p for p, _ in r.refinements]
        for p, sup in r.refinements:
            assert sum(pattern_matches(p, s, clinic) for s in db) == sup >= 2
        for a in pats:
            for b in pats:
                if a != b:
                    assert not all(
                        t.subsumes(x, y) for t, x, y in zip((sl.taxonomy for sl in _layout(a, clinic)), a.slots, b.slots)
                    )


def _layout(p, schema):
    from relseq.model import slot_layout

    return slot_layout(p.base, schema)
