import pytest

from relseq.datagen import GenSpec, InfeasibleSpec, SplitMix64, build_schema, generate_db
from relseq.model import load_schema, parse_pattern, parse_sequence_db, pattern_matches

PLANT = "A(A1) ; B(Any) | r(2,1)=[Resistant]"


def load(files):
    schema = load_schema(files["schema.txt"], taxonomy_texts=files)
    return schema, parse_sequence_db(files["data.txt"], schema)


def test_splitmix_reference_values():
    r = SplitMix64(1234567)
    assert [r.next_u64() for _ in range(2)] == [6457827717110365317, 3203168211198807973]
    assert hex(SplitMix64(0).next_u64()) == "0xe220a8397b1dcdaf"


def test_below_range():
    r = SplitMix64(5)
    xs = [r.below(7) for _ in range(2000)]
    assert set(xs) == set(range(7))
    assert all(0.0 <= r.random() < 1.0 for _ in range(1000))


def test_geometric_mean():
    r = SplitMix64(9)
    xs = [r.geometric(6.0) for _ in range(20_000)]
    assert min(xs) == 1
    assert abs(sum(xs) / len(xs) - 6.0) < 0.2


def test_same_seed_same_bytes():
    spec = GenSpec(seed=11, n_sequences=40, planted=[(PLANT, 0.3)])
    assert generate_db(spec) == generate_db(GenSpec(seed=11, n_sequences=40, planted=[(PLANT, 0.3)]))
    assert generate_db(spec) != generate_db(GenSpec(seed=12, n_sequences=40, planted=[(PLANT, 0.3)]))


def test_planted_support():
    files = generate_db(GenSpec(seed=4, n_sequences=100, planted=[(PLANT, 0.5)]))
    schema, db = load(files)
    p = parse_pattern(PLANT, schema)
    assert sum(pattern_matches(p, s, schema) for s in db) >= 50


def test_zero_probability_leaves_background_only():
    spec = GenSpec(seed=4, n_sequences=100)
    schema, db = load(generate_db(spec))
    planted_schema, planted_db = load(generate_db(GenSpec(seed=4, n_sequences=100, planted=[(PLANT, 0.0)])))
    p = parse_pattern(PLANT, schema)
    background = sum(pattern_matches(p, s, schema) for s in db)
    assert background < 50
    assert sum(pattern_matches(p, s, planted_schema) for s in planted_db) < 50


def test_empty_db():
    files = generate_db(GenSpec(seed=1, n_sequences=0))
    assert load(files)[1] == []


def test_schema_shape():
    schema = build_schema(GenSpec(seed=0, n_event_types=3, branching=2, depth=2))
    assert schema.type_names == ["A", "B", "C"]
    assert len(schema.event_schema("A")[0]) == 1 + 2 + 4
    assert schema.rel_schema("A", "A")[0].name == "ID"
    assert schema.rel_schema("C", "A")[0].name == "SIR"


def test_fixed_length():
    _, db = load(generate_db(GenSpec(seed=2, n_sequences=20, events_per_seq=5, distribution="fixed")))
    assert {len(s.events) for s in db} == {5}


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(planted=[("A(Any) ; A(Any) ; A(Any)", 0.5)], events_per_seq=2, distribution="fixed"),
        dict(planted=[("Q(Any)", 0.5)]),
        dict(planted=[(PLANT, 1.5)]),
        dict(n_event_types=0),
        dict(distribution="poisson"),
    ],
)
def test_infeasible(kwargs):
    with pytest.raises(InfeasibleSpec):
        generate_db(GenSpec(seed=0, **kwargs))
