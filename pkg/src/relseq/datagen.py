"""Seeded synthetic sequence databases with planted refined patterns.

Randomness comes from SplitMix64 (Steele, Lea & Flood 2014) so the output
is byte-identical across platforms and easy to reproduce elsewhere:

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)                       (all mod 2**64)

Integers in ``[0, n)`` use the multiply-shift ``(out * n) >> 64``; floats
in ``[0, 1)`` use ``(out >> 11) / 2**53``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    Event,
    RefinedPattern,
    Schema,
    dump_sequence_db,
    make_sequence,
    parse_pattern,
    pattern_matches,
    slot_layout,
)
from .taxonomy import Taxonomy, parse_taxonomy

__all__ = ["SplitMix64", "GenSpec", "InfeasibleSpec", "build_schema", "generate_db"]

_MASK = (1 << 64) - 1

SIR_TAXONOMY = "(Any(Tested(Sensitive,Resistant,Intermediate),Not-tested))"
ID_TAXONOMY = "(Any(=,≠))"


class InfeasibleSpec(ValueError):
    pass


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return (self.next_u64() * n) >> 64

    def random(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def geometric(self, mean: float) -> int:
        """Support 1, 2, ... with the given mean."""
        if mean <= 1:
            return 1
        p = 1.0 / mean
        u = 1.0 - self.random()  # (0, 1]
        return 1 + int(math.log(u) / math.log(1.0 - p))


@dataclass
class GenSpec:
    seed: int
    n_sequences: int = 100
    events_per_seq: float = 6
    distribution: str = "geometric"  # or "fixed"
    n_event_types: int = 2
    branching: int = 3
    depth: int = 2
    txn_break_prob: float = 0.5
    # (pattern in the output-file syntax, injection probability)
    planted: list[tuple[str, float]] = field(default_factory=list)
    cross_rel_taxonomy: str = SIR_TAXONOMY
    same_rel_taxonomy: str = ID_TAXONOMY

    def __post_init__(self):
        if self.n_sequences < 0:
            raise InfeasibleSpec("n_sequences must be >= 0")
        if not 1 <= self.n_event_types <= 26:
            raise InfeasibleSpec("n_event_types must be in 1..26")
        if self.branching < 1 or self.depth < 0:
            raise InfeasibleSpec("branching must be >= 1 and depth >= 0")
        if self.distribution not in ("fixed", "geometric"):
            raise InfeasibleSpec(f"unknown distribution {self.distribution!r}")
        if self.events_per_seq < 1:
            raise InfeasibleSpec("events_per_seq must be >= 1")
        if not 0.0 <= self.txn_break_prob <= 1.0:
            raise InfeasibleSpec("txn_break_prob must be in [0, 1]")
        for _, prob in self.planted:
            if not 0.0 <= prob <= 1.0:
                raise InfeasibleSpec("injection probabilities must be in [0, 1]")


def _tree(name: str, prefix: str, branching: int, depth: int) -> Taxonomy:
    edges = []
    frontier = ["Any"]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            stem = prefix if node == "Any" else node + "."
            for b in range(1, branching + 1):
                child = f"{stem}{b}"
                edges.append((node, child))
                nxt.append(child)
        frontier = nxt
    return Taxonomy.from_edges(name, "Any", edges)


def build_schema(spec: GenSpec) -> Schema:
    types = [chr(ord("A") + i) for i in range(spec.n_event_types)]
    taxes: dict[str, Taxonomy] = {}
    event_types = {}
    for t in types:
        taxes[f"X{t}"] = _tree(f"X{t}", t, spec.branching, spec.depth)
        event_types[t] = (f"X{t}",)
    taxes["SIR"] = parse_taxonomy("SIR", spec.cross_rel_taxonomy)
    taxes["ID"] = parse_taxonomy("ID", spec.same_rel_taxonomy)
    rel_types = {}
    for i, a in enumerate(types):
        for b in types[i:]:
            rel_types[(a, b)] = ("ID",) if a == b else ("SIR",)
    return Schema(taxes, event_types, rel_types)


def _leaf_under(rng: SplitMix64, tax: Taxonomy, concept: str) -> str:
    leaves = [c for c in tax.descendants(concept) if not tax.children[c]]
    return rng.choice(leaves)


def _random_event(rng: SplitMix64, schema: Schema, types: list[str]) -> Event:
    t = rng.choice(types)
    return Event(t, tuple(rng.choice(tax.leaves()) for tax in schema.event_schema(t)))


def _planted_block(rng: SplitMix64, p: RefinedPattern, schema: Schema):
    """Concrete transactions for one pattern plus its internal relationship arrays."""
    layout = slot_layout(p.base, schema)
    ev_concepts: dict[int, list[str]] = {}
    rel: dict[tuple[int, int], list[str]] = {}
    for s, c in zip(layout, p.slots):
        leaf = _leaf_under(rng, s.taxonomy, c)
        if s.kind == "event":
            ev_concepts.setdefault(s.m, []).append(leaf)
        else:
            rel.setdefault((s.m, s.k), []).append(leaf)
    txs = []
    m = 1
    for tx in p.base.transactions:
        cur = []
        for t in tx:
            cur.append(Event(t, tuple(ev_concepts.get(m, ()))))
            m += 1
        txs.append(cur)
    return txs, rel


def _one_sequence(rng, spec, schema, sid, plants, types):
    need = sum(p.base.n_events for p in plants)
    if spec.distribution == "fixed":
        n = int(spec.events_per_seq)
    else:
        n = rng.geometric(spec.events_per_seq)
    n = max(n, need)
    noise = n - need

    blocks = []  # list of (transactions, relationship map over block-local ordinals)
    for p in plants:
        for _ in range(100):
            txs, rel = _planted_block(rng, p, schema)
            if all(len(set(tx)) == len(tx) for tx in txs):
                break
        else:
            raise InfeasibleSpec(f"cannot plant {p} with distinct events per transaction")
        blocks.append((txs, rel))

    noise_txs: list[list[Event]] = []
    for _ in range(noise):
        if not noise_txs or rng.random() < spec.txn_break_prob:
            noise_txs.append([])
        for _attempt in range(20):
            ev = _random_event(rng, schema, types)
            if ev not in noise_txs[-1]:
                noise_txs[-1].append(ev)
                break
        else:
            noise_txs.append([_random_event(rng, schema, types)])

    # interleave planted blocks between noise transactions
    units: list[tuple[list[list[Event]], dict]] = [([tx], {}) for tx in noise_txs]
    for blk in blocks:
        units.insert(rng.below(len(units) + 1), blk)

    txs: list[list[Event]] = []
    rels: dict[tuple[int, int], tuple[str, ...]] = {}
    offset = 0
    for unit_txs, unit_rel in units:
        for (m, k), arr in unit_rel.items():
            rels[(offset + m, offset + k)] = tuple(arr)
        txs.extend(unit_txs)
        offset += sum(len(tx) for tx in unit_txs)
    events = [e for tx in txs for e in tx]
    for k in range(2, len(events) + 1):
        for l in range(1, k):
            if (k, l) in rels:
                continue
            ek, el = events[k - 1], events[l - 1]
            taxes = schema.rel_schema(ek.etype, el.etype)
            if not taxes:
                continue
            if ek.etype == el.etype and [t.name for t in taxes] == ["ID"]:
                # identity relation: same concepts means the same thing again
                leaves = taxes[0].leaves()
                rels[(k, l)] = (leaves[0] if ek.concepts == el.concepts else leaves[1],)
            else:
                rels[(k, l)] = tuple(rng.choice(t.leaves()) for t in taxes)
    return make_sequence(sid, txs, rels, schema)


def generate_db(spec: GenSpec) -> dict[str, str]:
    """File name -> text for the schema, its taxonomies and the sequence database."""
    rng = SplitMix64(spec.seed)
    schema = build_schema(spec)
    types = schema.type_names
    plants = []
    for text, prob in spec.planted:
        try:
            p = parse_pattern(text, schema)
        except ValueError as exc:
            raise InfeasibleSpec(f"planted pattern {text!r}: {exc}") from None
        if spec.distribution == "fixed" and p.base.n_events > spec.events_per_seq:
            raise InfeasibleSpec(
                f"planted pattern has {p.base.n_events} events, sequences have {int(spec.events_per_seq)}"
            )
        plants.append((p, prob))

    n = spec.n_sequences
    hosts: list[set[int]] = []
    for _, prob in plants:
        # partial Fisher-Yates: the first floor(prob*n) positions host the plant
        idx = list(range(n))
        count = math.floor(prob * n)
        for i in range(count):
            j = i + rng.below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        hosts.append(set(idx[:count]))

    width = max(4, len(str(max(n - 1, 0))))
    db = []
    for s in range(n):
        mine = [p for (p, _), h in zip(plants, hosts) if s in h]
        sid = f"s{s:0{width}d}"
        for _attempt in range(50):
            seq = _one_sequence(rng, spec, schema, sid, mine, types)
            if all(pattern_matches(p, seq, schema) for p in mine):
                break
        else:
            raise InfeasibleSpec(f"could not plant patterns into sequence {sid}")
        db.append(seq)

    paths = {name: f"{name}.tax" for name in schema.taxonomies}
    files = {paths[name]: tax.serialize() + "\n" for name, tax in schema.taxonomies.items()}
    files["schema.txt"] = schema.dumps(paths)
    files["data.txt"] = dump_sequence_db(db, schema)
    return files
