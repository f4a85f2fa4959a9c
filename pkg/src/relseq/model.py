"""Schemas, sequences, patterns and their text formats.

Indexing conventions used throughout the package:

* event ordinals are 1-based over the events of a sequence (separators are
  not counted), so an occurrence vector ``lam`` is a strictly increasing
  tuple of 1-based ordinals;
* relationship arrays are stored once per unordered pair, keyed ``(k, l)``
  with ``k > l``;
* ``None`` stands for an unbounded max-gap / max-projected-length.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence as Seq

from .taxonomy import Taxonomy, TaxonomyError, parse_taxonomy

SEP = ";"


class ParseError(ValueError):
    """Malformed input; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


# ---------------------------------------------------------------------------
# schema


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class Schema:
    taxonomies: dict[str, Taxonomy]
    event_types: dict[str, tuple[str, ...]]
    rel_types: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for t, names in self.event_types.items():
            for n in names:
                if n not in self.taxonomies:
                    raise ParseError(f"event type {t!r} references unknown taxonomy {n!r}")
        fixed = {}
        for (a, b), names in self.rel_types.items():
            for t in (a, b):
                if t not in self.event_types:
                    raise ParseError(f"relationship type references unknown event type {t!r}")
            for n in names:
                if n not in self.taxonomies:
                    raise ParseError(f"relationship {a}x{b} references unknown taxonomy {n!r}")
            key = _pair(a, b)
            if key in fixed:
                raise ParseError(f"duplicate relationship type {a}x{b}")
            fixed[key] = tuple(names)
        self.rel_types = fixed
        self._rel_cache: dict[tuple[str, str], tuple[Taxonomy, ...]] = {}

    @property
    def type_names(self) -> list[str]:
        return sorted(self.event_types)

    def event_schema(self, etype: str) -> tuple[Taxonomy, ...]:
        try:
            return tuple(self.taxonomies[n] for n in self.event_types[etype])
        except KeyError:
            raise ParseError(f"unknown event type {etype!r}") from None

    def rel_schema(self, a: str, b: str) -> tuple[Taxonomy, ...]:
        key = _pair(a, b)
        hit = self._rel_cache.get(key)
        if hit is None:
            hit = tuple(self.taxonomies[n] for n in self.rel_types.get(key, ()))
            self._rel_cache[key] = hit
        return hit

    def dumps(self, paths: Mapping[str, str] | None = None) -> str:
        """Schema file text; ``paths`` maps taxonomy name to file path."""
        paths = paths or {n: f"{n}.tax" for n in self.taxonomies}
        lines = [f"taxonomy {n} {paths[n]}" for n in self.taxonomies]
        for t, names in self.event_types.items():
            lines.append(f"eventtype {t}" + (f" {','.join(names)}" if names else ""))
        for (a, b), names in self.rel_types.items():
            lines.append(f"reltype {a} {b}" + (f" {','.join(names)}" if names else ""))
        return "\n".join(lines) + "\n"


def _directives(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _split_list(tok: str, lineno: int) -> tuple[str, ...]:
    parts = tuple(tok.split(","))
    if any(not p for p in parts):
        raise ParseError(f"empty item in list {tok!r}", lineno)
    return parts


def load_schema(
    text: str,
    base_dir: str | os.PathLike | None = None,
    taxonomy_texts: Mapping[str, str] | None = None,
) -> Schema:
    """Parse a schema file.

    Taxonomy paths are looked up in ``taxonomy_texts`` first (keyed by the
    path as written), then read from disk relative to ``base_dir``.
    """
    taxonomies: dict[str, Taxonomy] = {}
    event_types: dict[str, tuple[str, ...]] = {}
    rels: list[tuple[int, str, str, tuple[str, ...]]] = []
    for lineno, toks in _directives(text):
        kind = toks[0]
        if kind == "taxonomy":
            if len(toks) != 3:
                raise ParseError("expected: taxonomy <name> <path>", lineno)
            name, path = toks[1], toks[2]
            if name in taxonomies:
                raise ParseError(f"duplicate taxonomy {name!r}", lineno)
            if taxonomy_texts is not None and path in taxonomy_texts:
                body = taxonomy_texts[path]
            else:
                full = os.path.join(base_dir, path) if base_dir is not None else path
                try:
                    with open(full, encoding="utf-8") as fh:
                        body = fh.read()
                except OSError as exc:
                    raise ParseError(f"cannot read taxonomy file {path!r}: {exc}", lineno) from None
            try:
                taxonomies[name] = parse_taxonomy(name, body)
            except TaxonomyError as exc:
                raise ParseError(f"taxonomy {name!r}: {exc}", lineno) from None
        elif kind == "eventtype":
            if len(toks) not in (2, 3):
                raise ParseError("expected: eventtype <type> [<taxonomy>,...]", lineno)
            t = toks[1]
            if t in event_types:
                raise ParseError(f"duplicate event type {t!r}", lineno)
            names = _split_list(toks[2], lineno) if len(toks) == 3 else ()
            for n in names:
                if n not in taxonomies:
                    raise ParseError(f"unknown taxonomy {n!r}", lineno)
            event_types[t] = names
        elif kind == "reltype":
            if len(toks) not in (3, 4):
                raise ParseError("expected: reltype <typeA> <typeB> [<taxonomy>,...]", lineno)
            names = _split_list(toks[3], lineno) if len(toks) == 4 else ()
            rels.append((lineno, toks[1], toks[2], names))
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)

    rel_types: dict[tuple[str, str], tuple[str, ...]] = {}
    for lineno, a, b, names in rels:
        for t in (a, b):
            if t not in event_types:
                raise ParseError(f"unknown event type {t!r}", lineno)
        for n in names:
            if n not in taxonomies:
                raise ParseError(f"unknown taxonomy {n!r}", lineno)
        key = _pair(a, b)
        if key in rel_types:
            raise ParseError(f"duplicate relationship type {a}x{b}", lineno)
        rel_types[key] = names
    return Schema(taxonomies, event_types, rel_types)


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class Event:
    etype: str
    concepts: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.etype}({','.join(self.concepts)})"


@dataclass(frozen=True, eq=True)
class Sequence:
    """A canonical relationship-aware sequence.

    Build through :func:`make_sequence` or :func:`parse_sequence_db`; both
    validate, fill in default relationships and canonicalize.
    """

    sid: str
    transactions: tuple[tuple[Event, ...], ...]
    rels: Mapping[tuple[int, int], tuple[str, ...]] = field(default_factory=dict, compare=True)

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def events(self) -> tuple[Event, ...]:
        return tuple(e for tx in self.transactions for e in tx)

    @cached_property
    def txn_of(self) -> tuple[int, ...]:
        """0-based transaction index of each event (0-based event position)."""
        return tuple(i for i, tx in enumerate(self.transactions) for _ in tx)

    @cached_property
    def types(self) -> tuple[str, ...]:
        return tuple(e.etype for e in self.events)

    @property
    def elements(self) -> list[Event | str]:
        out: list[Event | str] = []
        for i, tx in enumerate(self.transactions):
            if i:
                out.append(SEP)
            out.extend(tx)
        return out

    def __len__(self) -> int:
        return len(self.events)

    def rel(self, a: int, b: int) -> tuple[str, ...]:
        """Relationship array between 1-based event ordinals ``a != b``."""
        return self.rels.get((a, b) if a > b else (b, a), ())


def _event_key(e: Event, schema: Schema) -> tuple:
    taxes = schema.event_schema(e.etype)
    return (e.etype, tuple(t.rank[c] for t, c in zip(taxes, e.concepts)))


def _validate_event(e: Event, schema: Schema, lineno: int | None = None) -> None:
    if e.etype not in schema.event_types:
        raise ParseError(f"unknown event type {e.etype!r}", lineno)
    taxes = schema.event_schema(e.etype)
    if len(e.concepts) != len(taxes):
        raise ParseError(
            f"event {e.etype} expects {len(taxes)} concept(s), got {len(e.concepts)}", lineno
        )
    for t, c in zip(taxes, e.concepts):
        if c not in t:
            raise ParseError(f"unknown concept {c!r} for taxonomy {t.name!r}", lineno)


def canonicalize(seq: Sequence, schema: Schema) -> Sequence:
    """Sort each transaction canonically and re-key relationships.

    Events sort by type name, then by their concept arrays compared through
    the pre-order rank of each concept.
    """
    new_of_old: dict[int, int] = {}
    txs = []
    old = 0
    new = 0
    for tx in seq.transactions:
        order = sorted(range(len(tx)), key=lambda i: _event_key(tx[i], schema))
        for pos_new, i in enumerate(order):
            new_of_old[old + i + 1] = new + pos_new + 1
        txs.append(tuple(tx[i] for i in order))
        old += len(tx)
        new += len(tx)
    rels = {}
    for (k, l), arr in seq.rels.items():
        a, b = new_of_old[k], new_of_old[l]
        rels[(a, b) if a > b else (b, a)] = arr
    return Sequence(seq.sid, tuple(txs), dict(sorted(rels.items())))


def make_sequence(
    sid: str,
    transactions: Iterable[Iterable[Event]],
    rels: Mapping[tuple[int, int], Seq[str]] | None,
    schema: Schema,
) -> Sequence:
    """Validate, default missing relationships to the root, canonicalize.

    ``rels`` keys are 1-based ordinals in the order events are given here.
    """
    txs = tuple(tuple(tx) for tx in transactions)
    if not txs:
        raise ParseError(f"sequence {sid!r} has no events")
    for tx in txs:
        if not tx:
            raise ParseError(f"sequence {sid!r} has an empty transaction")
        if len(set(tx)) != len(tx):
            raise ParseError(f"sequence {sid!r} has duplicate events within a transaction")
        for e in tx:
            _validate_event(e, schema)
    events = [e for tx in txs for e in tx]
    n = len(events)
    full: dict[tuple[int, int], tuple[str, ...]] = {}
    for (k, l), arr in (rels or {}).items():
        if not (1 <= l < k <= n):
            raise ParseError(f"relationship index ({k},{l}) out of range or not k>l")
        taxes = schema.rel_schema(events[k - 1].etype, events[l - 1].etype)
        arr = tuple(arr)
        if len(arr) != len(taxes):
            raise ParseError(
                f"relationship ({k},{l}) expects {len(taxes)} concept(s), got {len(arr)}"
            )
        for t, c in zip(taxes, arr):
            if c not in t:
                raise ParseError(f"unknown concept {c!r} for taxonomy {t.name!r}")
        full[(k, l)] = arr
    for k in range(2, n + 1):
        for l in range(1, k):
            if (k, l) in full:
                continue
            taxes = schema.rel_schema(events[k - 1].etype, events[l - 1].etype)
            if taxes:
                full[(k, l)] = tuple(t.root for t in taxes)
    return canonicalize(Sequence(sid, txs, full), schema)


def parse_sequence_db(text: str, schema: Schema) -> list[Sequence]:
    """Parse ``seq <id> ... end`` blocks into canonical sequences."""
    out: list[Sequence] = []
    seen: set[str] = set()
    cur: dict | None = None

    def close(lineno: int) -> None:
        if cur["txs"][-1] == [] and len(cur["txs"]) > 1:
            raise ParseError("trailing transaction separator", lineno)
        if not cur["events"]:
            raise ParseError(f"sequence {cur['sid']!r} has no events", lineno)
        n = len(cur["events"])
        rels = {}
        for ln, k, l, arr in cur["rels"]:
            if not (1 <= l < k <= n):
                raise ParseError(f"relationship index ({k},{l}) out of range or not k>l", ln)
            if (k, l) in rels:
                raise ParseError(f"duplicate relationship ({k},{l})", ln)
            taxes = schema.rel_schema(cur["events"][k - 1].etype, cur["events"][l - 1].etype)
            if len(arr) != len(taxes):
                raise ParseError(
                    f"relationship ({k},{l}) expects {len(taxes)} concept(s), got {len(arr)}", ln
                )
            for t, c in zip(taxes, arr):
                if c not in t:
                    raise ParseError(f"unknown concept {c!r} for taxonomy {t.name!r}", ln)
            rels[(k, l)] = arr
        try:
            out.append(make_sequence(cur["sid"], cur["txs"], rels, schema))
        except ParseError as exc:
            raise ParseError(str(exc), cur["lineno"]) from None

    for lineno, toks in _directives(text):
        kind = toks[0]
        if kind == "seq":
            if cur is not None:
                raise ParseError("missing 'end' before new 'seq'", lineno)
            if len(toks) != 2:
                raise ParseError("expected: seq <id>", lineno)
            if toks[1] in seen:
                raise ParseError(f"duplicate sequence id {toks[1]!r}", lineno)
            seen.add(toks[1])
            cur = {"sid": toks[1], "txs": [[]], "events": [], "rels": [], "lineno": lineno}
            continue
        if cur is None:
            raise ParseError(f"directive {kind!r} outside a seq block", lineno)
        if kind == "end":
            if len(toks) != 1:
                raise ParseError("unexpected tokens after 'end'", lineno)
            close(lineno)
            cur = None
        elif kind == "e":
            if len(toks) not in (2, 3):
                raise ParseError("expected: e <type> [<concept>,...]", lineno)
            concepts = _split_list(toks[2], lineno) if len(toks) == 3 else ()
            ev = Event(toks[1], concepts)
            _validate_event(ev, schema, lineno)
            if ev in cur["txs"][-1]:
                raise ParseError("duplicate event within a transaction", lineno)
            cur["txs"][-1].append(ev)
            cur["events"].append(ev)
        elif kind == "ts":
            if len(toks) != 1:
                raise ParseError("unexpected tokens after 'ts'", lineno)
            if not cur["txs"][-1]:
                raise ParseError("empty transaction", lineno)
            cur["txs"].append([])
        elif kind == "r":
            if len(toks) not in (3, 4):
                raise ParseError("expected: r <k> <l> <concept>,...", lineno)
            try:
                k, l = int(toks[1]), int(toks[2])
            except ValueError:
                raise ParseError("relationship indices must be integers", lineno) from None
            arr = _split_list(toks[3], lineno) if len(toks) == 4 else ()
            cur["rels"].append((lineno, k, l, arr))
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)
    if cur is not None:
        raise ParseError(f"sequence {cur['sid']!r} not terminated by 'end'")
    return out


def dump_sequence_db(db: Iterable[Sequence], schema: Schema) -> str:
    """Serialize sequences; all-root relationships are omitted (they are the default)."""
    lines = []
    for seq in db:
        lines.append(f"seq {seq.sid}")
        for i, tx in enumerate(seq.transactions):
            if i:
                lines.append("ts")
            for e in tx:
                lines.append(f"e {e.etype} {','.join(e.concepts)}" if e.concepts else f"e {e.etype}")
        ev = seq.events
        for (k, l), arr in sorted(seq.rels.items()):
            taxes = schema.rel_schema(ev[k - 1].etype, ev[l - 1].etype)
            if any(c != t.root for c, t in zip(arr, taxes)):
                lines.append(f"r {k} {l} {','.join(arr)}")
        lines.append("end")
    return "\n".join(lines) + ("\n" if lines else "")


def event_index(seq: Sequence, i: int) -> int:
    """1-based position of the ``i``-th event in the element list (separators counted)."""
    if not 1 <= i <= len(seq.events):
        raise IndexError(f"event ordinal {i} out of range 1..{len(seq.events)}")
    return i + seq.txn_of[i - 1]


def project(seq: Sequence, lam: Seq[int]) -> list[Event]:
    n = len(seq.events)
    prev = 0
    for x in lam:
        if not (prev < x <= n):
            raise IndexError(f"index vector {tuple(lam)} not strictly increasing within 1..{n}")
        prev = x
    return [seq.events[x - 1] for x in lam]


def type_aware(seq: Sequence) -> list[str]:
    return [e if e == SEP else e.etype for e in seq.elements]


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True, order=False)
class TypePattern:
    """Event types grouped into transactions, e.g. ``((a, b), (c,))`` for ⟨ab;c⟩."""

    transactions: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        for tx in self.transactions:
            if not tx:
                raise ValueError("type-pattern with an empty transaction")
            if list(tx) != sorted(tx):
                raise ValueError(f"transaction {tx} not in canonical order")

    @classmethod
    def parse(cls, text: str) -> "TypePattern":
        """``"a b ; c"`` -> ⟨ab;c⟩."""
        txs = [tuple(sorted(part.split())) for part in text.split(SEP)] if text.strip() else []
        return cls(tuple(txs))

    @cached_property
    def events(self) -> tuple[str, ...]:
        return tuple(t for tx in self.transactions for t in tx)

    @cached_property
    def starts_txn(self) -> tuple[bool, ...]:
        """Per event: does it open a new transaction (is preceded by a separator)?"""
        return tuple(j == 0 and i > 0 for i, tx in enumerate(self.transactions) for j in range(len(tx)))

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def elements(self) -> list[str]:
        out: list[str] = []
        for i, tx in enumerate(self.transactions):
            if i:
                out.append(SEP)
            out.extend(tx)
        return out

    def sort_key(self) -> tuple:
        return (self.n_events, tuple(self.elements))

    def delete(self, idx: int) -> "TypePattern":
        """Drop the event at 0-based position ``idx``; an emptied transaction disappears."""
        txs = []
        pos = 0
        for tx in self.transactions:
            if pos <= idx < pos + len(tx):
                rest = tx[: idx - pos] + tx[idx - pos + 1 :]
                if rest:
                    txs.append(rest)
            else:
                txs.append(tx)
            pos += len(tx)
        return TypePattern(tuple(txs))

    def __str__(self) -> str:
        return " ; ".join(" ".join(tx) for tx in self.transactions)


class Slot(NamedTuple):
    kind: str  # "event" or "rel"
    m: int  # 1-based pattern event
    k: int  # partner event for relationship slots, 0 for event slots
    pos: int  # index within the event's / relationship's concept array
    taxonomy: Taxonomy


def slot_layout(base: TypePattern, schema: Schema) -> tuple[Slot, ...]:
    """Slot order: for each event m, its concepts, then r(m,1) ... r(m,m-1)."""
    ev = base.events
    out: list[Slot] = []
    for m in range(1, len(ev) + 1):
        for pos, tax in enumerate(schema.event_schema(ev[m - 1])):
            out.append(Slot("event", m, 0, pos, tax))
        for k in range(1, m):
            for pos, tax in enumerate(schema.rel_schema(ev[m - 1], ev[k - 1])):
                out.append(Slot("rel", m, k, pos, tax))
    return tuple(out)


def concept_flatten(seq: Sequence, lam: Seq[int], layout: Seq[Slot]) -> tuple[str, ...]:
    """Concept-aware representation of ``seq`` projected on ``lam``, in layout order."""
    events = project(seq, lam)
    out = []
    for s in layout:
        if s.kind == "event":
            out.append(events[s.m - 1].concepts[s.pos])
        else:
            a, b = lam[s.m - 1], lam[s.k - 1]
            arr = seq.rels.get((a, b) if a > b else (b, a))
            if arr is None:
                raise KeyError(f"sequence {seq.sid!r} has no relationship for ({a},{b})")
            out.append(arr[s.pos])
    return tuple(out)


@dataclass(frozen=True)
class RefinedPattern:
    base: TypePattern
    slots: tuple[str, ...]

    def validate(self, schema: Schema) -> tuple[Slot, ...]:
        layout = slot_layout(self.base, schema)
        if len(layout) != len(self.slots):
            raise ValueError(f"pattern has {len(self.slots)} slots, layout needs {len(layout)}")
        for s, c in zip(layout, self.slots):
            if c not in s.taxonomy:
                raise ValueError(f"concept {c!r} not in taxonomy {s.taxonomy.name!r}")
        return layout

    @classmethod
    def all_root(cls, base: TypePattern, schema: Schema) -> "RefinedPattern":
        return cls(base, tuple(s.taxonomy.root for s in slot_layout(base, schema)))

    def is_specialized(self, schema: Schema) -> bool:
        return any(c != s.taxonomy.root for s, c in zip(slot_layout(self.base, schema), self.slots))


def format_pattern(p: RefinedPattern, schema: Schema) -> str:
    """``B(Any) ; T(Any) | r(2,1)=[Resistant]``; all-root relationship groups are left out."""
    layout = slot_layout(p.base, schema)
    ev_concepts: dict[int, list[str]] = {m: [] for m in range(1, p.base.n_events + 1)}
    rel_groups: dict[tuple[int, int], list[tuple[str, Taxonomy]]] = {}
    for s, c in zip(layout, p.slots):
        if s.kind == "event":
            ev_concepts[s.m].append(c)
        else:
            rel_groups.setdefault((s.m, s.k), []).append((c, s.taxonomy))
    parts = []
    m = 1
    for i, tx in enumerate(p.base.transactions):
        if i:
            parts.append(SEP)
        for t in tx:
            parts.append(f"{t}({','.join(ev_concepts[m])})")
            m += 1
    text = " ".join(parts)
    for (a, b), grp in sorted(rel_groups.items()):
        if any(c != tax.root for c, tax in grp):
            text += f" | r({a},{b})=[{','.join(c for c, _ in grp)}]"
    return text


def parse_pattern(text: str, schema: Schema) -> RefinedPattern:
    """Inverse of :func:`format_pattern`."""
    head, *clauses = [x.strip() for x in text.split("|")]
    txs: list[list[tuple[str, tuple[str, ...]]]] = [[]]
    for tok in head.split():
        if tok == SEP:
            txs.append([])
            continue
        if not (tok.endswith(")") and "(" in tok):
            raise ParseError(f"bad event token {tok!r}")
        name, inner = tok[:-1].split("(", 1)
        txs[-1].append((name, tuple(inner.split(",")) if inner else ()))
    if any(not tx for tx in txs):
        raise ParseError("empty transaction in pattern")
    for tx in txs:
        if [t for t, _ in tx] != sorted(t for t, _ in tx):
            raise ParseError("pattern transaction not in canonical type order")
    base = TypePattern(tuple(tuple(t for t, _ in tx) for tx in txs))
    ev = [c for tx in txs for _, c in tx]
    rel: dict[tuple[int, int], tuple[str, ...]] = {}
    for cl in clauses:
        if not (cl.startswith("r(") and ")=[" in cl and cl.endswith("]")):
            raise ParseError(f"bad relationship clause {cl!r}")
        idx, arr = cl[2:-1].split(")=[")
        a, b = (int(x) for x in idx.split(","))
        rel[(a, b)] = tuple(arr.split(",")) if arr else ()
    slots = []
    for s in slot_layout(base, schema):
        if s.kind == "event":
            if len(ev[s.m - 1]) != len(schema.event_schema(base.events[s.m - 1])):
                raise ParseError(f"event {s.m} has wrong number of concepts")
            slots.append(ev[s.m - 1][s.pos])
        else:
            arr = rel.get((s.m, s.k))
            slots.append(arr[s.pos] if arr is not None else s.taxonomy.root)
    p = RefinedPattern(base, tuple(slots))
    try:
        p.validate(schema)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return p


def pattern_matches(
    p: RefinedPattern,
    seq: Sequence,
    schema: Schema,
    mg: int | None = None,
    mpl: int | None = None,
) -> bool:
    """Does ``p`` have at least one occurrence in ``seq`` under the constraints?"""
    layout = p.validate(schema)
    ev_req: dict[int, list[tuple[int, str, Taxonomy]]] = {}
    rel_req: dict[int, list[tuple[int, int, str, Taxonomy]]] = {}
    for s, c in zip(layout, p.slots):
        if c == s.taxonomy.root:
            continue
        if s.kind == "event":
            ev_req.setdefault(s.m, []).append((s.pos, c, s.taxonomy))
        else:
            rel_req.setdefault(s.m, []).append((s.k, s.pos, c, s.taxonomy))
    types = p.base.events
    starts = p.base.starts_txn
    n = len(seq.events)
    K = len(types)
    lam: list[int] = []

    def fits(m: int, j: int) -> bool:
        # m: 1-based pattern event; j: 1-based sequence ordinal
        e = seq.events[j - 1]
        if e.etype != types[m - 1]:
            return False
        if m > 1:
            prev = lam[-1]
            same = seq.txn_of[j - 1] == seq.txn_of[prev - 1]
            if same == starts[m - 1]:
                return False
            if mg is not None and j - prev > mg:
                return False
            if mpl is not None and j - lam[0] > mpl:
                return False
        for pos, c, tax in ev_req.get(m, ()):
            if not tax.subsumes(c, e.concepts[pos]):
                return False
        for k, pos, c, tax in rel_req.get(m, ()):
            if not tax.subsumes(c, seq.rel(j, lam[k - 1])[pos]):
                return False
        return True

    def search(m: int) -> bool:
        if m > K:
            return True
        start = lam[-1] + 1 if lam else 1
        for j in range(start, n + 1):
            if fits(m, j):
                lam.append(j)
                if search(m + 1):
                    return True
                lam.pop()
        return False

    return search(1)
