"""Set-semantics relations over dictionary-encoded integer values.

Every query fixes a single global attribute order (order of first
appearance in the query text).  Schemas and tuple layouts follow that
order everywhere, so tuples can be compared positionally and output
ordering is plain lexicographic sorting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import SchemaError

Row = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Attribute:
    """A query variable.  Identity and ordering live in ``id``."""

    id: int
    name: str = field(compare=False)

    def __repr__(self) -> str:  # keep test output readable
        return f"{self.name}#{self.id}"


def make_attrs(*names: str, start: int = 0) -> tuple[Attribute, ...]:
    """Mint attributes with consecutive ids, in the order given."""
    return tuple(Attribute(start + i, n) for i, n in enumerate(names))


def attrs_sorted(attrs: Iterable[Attribute]) -> tuple[Attribute, ...]:
    return tuple(sorted(set(attrs)))


@dataclass(frozen=True)
class Relation:
    """An immutable, duplicate-free relation.

    ``schema`` must already be in global attribute order and ``rows``
    are stored sorted lexicographically, so equality of relations is
    plain structural equality.
    """

    schema: tuple[Attribute, ...]
    rows: tuple[Row, ...]

    def __post_init__(self) -> None:
        if len(set(self.schema)) != len(self.schema):
            raise SchemaError(f"duplicate attribute in schema {self.schema}")
        if any(self.schema[i] >= self.schema[i + 1] for i in range(len(self.schema) - 1)):
            raise SchemaError(f"schema not in global attribute order: {self.schema}")
        arity = len(self.schema)
        seen = set()
        for t in self.rows:
            if len(t) != arity:
                raise SchemaError(f"row {t} does not match arity {arity}")
            if any((not isinstance(v, int)) or v < 0 for v in t):
                raise SchemaError(f"row {t} has a non-encodable value")
            seen.add(t)
        if len(seen) != len(self.rows) or any(
            self.rows[i] > self.rows[i + 1] for i in range(len(self.rows) - 1)
        ):
            object.__setattr__(self, "rows", tuple(sorted(seen)))

    @cached_property
    def _rowset(self) -> frozenset[Row]:
        return frozenset(self.rows)

    @property
    def arity(self) -> int:
        return len(self.schema)

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, t: Row) -> bool:
        return t in self._rowset

    def position(self, a: Attribute) -> int:
        try:
            return self.schema.index(a)
        except ValueError:
            raise SchemaError(f"attribute {a} not in schema {self.schema}") from None

    def column(self, a: Attribute) -> tuple[int, ...]:
        """Distinct values of one column, sorted."""
        i = self.position(a)
        return tuple(sorted({t[i] for t in self.rows}))


def relation(schema: Sequence[Attribute], rows: Iterable[Sequence[int]]) -> Relation:
    """Build a Relation, permuting columns into global attribute order."""
    schema = tuple(schema)
    order = sorted(range(len(schema)), key=lambda i: schema[i])
    fixed = tuple(schema[i] for i in order)
    permuted = []
    for r in rows:
        if len(r) != len(schema):
            raise SchemaError(f"row {tuple(r)} does not match arity {len(schema)}")
        permuted.append(tuple(r[i] for i in order))
    return Relation(fixed, tuple(permuted))


def project(r: Relation, attrs: Iterable[Attribute]) -> Relation:
    """Projection with duplicate elimination; result follows global order."""
    target = attrs_sorted(attrs)
    missing = [a for a in target if a not in r.schema]
    if missing:
        raise SchemaError(f"cannot project onto {missing}: not in {r.schema}")
    idx = tuple(r.schema.index(a) for a in target)
    return Relation(target, tuple({tuple(t[i] for i in idx) for t in r.rows}))


def select(r: Relation, bindings: Mapping[Attribute, int]) -> Relation:
    """Keep rows matching every binding exactly."""
    for a in bindings:
        if a not in r.schema:
            raise SchemaError(f"selection on {a} outside schema {r.schema}")
    items = [(r.schema.index(a), v) for a, v in bindings.items()]
    return Relation(r.schema, tuple(t for t in r.rows if all(t[i] == v for i, v in items)))


def semijoin(r: Relation, t: Mapping[Attribute, int]) -> Relation:
    """Rows of ``r`` that agree with ``t`` on the shared attributes.

    Attributes of ``t`` outside ``r.schema`` impose no constraint, so a
    disjoint binding returns ``r`` unchanged.
    """
    shared = {a: v for a, v in t.items() if a in r.schema}
    if not shared:
        return r
    return select(r, shared)


def natural_join(r: Relation, s: Relation) -> Relation:
    """Plain hash natural join; fine for small inputs and oracles."""
    shared = [a for a in r.schema if a in s.schema]
    out_schema = attrs_sorted(r.schema + s.schema)
    r_pos = [r.schema.index(a) for a in shared]
    s_pos = [s.schema.index(a) for a in shared]
    table: dict[Row, list[Row]] = {}
    for t in s.rows:
        table.setdefault(tuple(t[i] for i in s_pos), []).append(t)
    merged: dict[Attribute, int] = {}
    out = set()
    for t in r.rows:
        for u in table.get(tuple(t[i] for i in r_pos), ()):
            merged = {**dict(zip(r.schema, t)), **dict(zip(s.schema, u))}
            out.add(tuple(merged[a] for a in out_schema))
    return Relation(out_schema, tuple(out))


@dataclass(frozen=True)
class Hypergraph:
    """Query shape: vertices are attributes, edges are relation schemas."""

    vertices: tuple[Attribute, ...]
    edges: tuple[tuple[Attribute, ...], ...]

    def __post_init__(self) -> None:
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise SchemaError("duplicate vertex")
        covered: set[Attribute] = set()
        for e in self.edges:
            if not e:
                raise SchemaError("empty hyperedge")
            if not set(e) <= vs:
                raise SchemaError(f"edge {e} uses unknown vertices")
            if tuple(sorted(set(e))) != e:
                raise SchemaError(f"edge {e} not sorted in global order")
            covered |= set(e)
        if covered != vs:
            raise SchemaError(f"isolated vertices: {vs - covered}")

    def edges_with(self, a: Attribute) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.edges) if a in e)


@dataclass(frozen=True)
class JoinQuery:
    """A natural join: one relation bound to each hyperedge."""

    hypergraph: Hypergraph
    relations: tuple[Relation, ...]

    def __post_init__(self) -> None:
        if len(self.relations) != len(self.hypergraph.edges):
            raise SchemaError("one relation per edge required")
        for e, r in zip(self.hypergraph.edges, self.relations):
            if r.schema != e:
                raise SchemaError(f"relation schema {r.schema} does not match edge {e}")

    @property
    def attrs(self) -> tuple[Attribute, ...]:
        return tuple(sorted(self.hypergraph.vertices))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.relations)


def join_query(relations: Sequence[Relation]) -> JoinQuery:
    """Assemble a JoinQuery whose hypergraph is read off the schemas."""
    verts = attrs_sorted(a for r in relations for a in r.schema)
    edges = tuple(r.schema for r in relations)
    return JoinQuery(Hypergraph(verts, edges), tuple(relations))


def oracle_join(q: JoinQuery) -> Relation:
    """Reference join: brute force over the active-domain cross product.

    Deliberately naive so it stays an independent yardstick for every
    other evaluator in the package.  Candidate values for an attribute
    are those present in all relations covering it.
    """
    attrs = q.attrs
    domains: list[tuple[int, ...]] = []
    for a in attrs:
        cols = [set(r.column(a)) for r in q.relations if a in r.schema]
        dom = set.intersection(*cols) if cols else set()
        domains.append(tuple(sorted(dom)))
    checks = []
    for r in q.relations:
        checks.append((tuple(attrs.index(a) for a in r.schema), r._rowset))
    out = []
    for cand in product(*domains):
        if all(tuple(cand[i] for i in idx) in rows for idx, rows in checks):
            out.append(cand)
    return Relation(attrs, tuple(out))
