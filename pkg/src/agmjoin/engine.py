"""Worst-case-optimal join engines over sorted tries.

The shared recursion splits the attribute set V of a subproblem into I
and the rest J, joins the I-projections of the relations touching I
into a list L of partial tuples, then extends each one over J against
the relations narrowed by that partial tuple.  Narrowing is a trie
prefix descent; relations are never copied.  Three ways of picking I
are provided:

* ``leapfrog`` peels the first attribute in the global order, so every
  level is one sorted k-way intersection of trie child lists.
* ``nprr`` picks the edge J with the heaviest cover weight, recurses on
  I = V minus J, and finishes each group with a two-choices step: scan
  the J-relation when it is no bigger than the estimated join of the
  remaining relations, otherwise join those and probe into J.
* ``fixed-sequence`` consumes caller-given attribute blocks in order,
  peeling single attributes inside a block.

Cover weights travel with the recursion: restricting to the edges that
meet a subproblem keeps a cover feasible, and the two-choices rescale
by 1/(1 - x_J) does too.  That is what ties the measured operation
counts to the fractional-cover size bound instead of to intermediate
result sizes.

The outer loop over partial tuples reads only immutable tries, so it
could run in parallel with per-worker meters merged by summation;
execution here is single-threaded and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .bounds import FractionalCover, is_cover, min_cover_lp
from .errors import (
    InfeasibleCoverError,
    InvalidPartitionError,
    MalformedCoverError,
    SchemaError,
)
from .relational import Attribute, JoinQuery, Relation, Row
from .trie import CostMeter, TrieIndex, build_trie, intersect, iter_leaves


@dataclass(frozen=True)
class PartitionStrategy:
    """How the recursion picks the group attributes I at each level."""

    kind: str  # "nprr" | "leapfrog" | "fixed-sequence"
    sequence: tuple[tuple[Attribute, ...], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("nprr", "leapfrog", "fixed-sequence"):
            raise InvalidPartitionError(f"unknown strategy kind {self.kind!r}")


def nprr_strategy() -> PartitionStrategy:
    """Edge-driven splits with the two-choices group solver."""
    return PartitionStrategy("nprr")


def leapfrog_strategy() -> PartitionStrategy:
    """Peel one attribute per level in the global order."""
    return PartitionStrategy("leapfrog")


def fixed_sequence_strategy(blocks: Iterable[Iterable[Attribute]]) -> PartitionStrategy:
    """Consume the given attribute blocks left to right as the I sets."""
    seq = tuple(tuple(sorted(set(b))) for b in blocks)
    return PartitionStrategy("fixed-sequence", seq)


@dataclass(frozen=True)
class JoinRun:
    """One join execution: its output plus the accounting that produced it."""

    output: Relation
    meter: CostMeter
    strategy: PartitionStrategy
    cover: FractionalCover


class _View:
    """A relation narrowed by a bound prefix, positioned inside a trie.

    ``remaining`` is the unconsumed tail of the trie order; its first
    ``len(edge-attrs ∩ subproblem-attrs)`` entries are the attributes
    this view contributes to the current subproblem, and enumerating
    prefixes at that depth realizes the projection.
    """

    __slots__ = ("edge", "trie", "node", "depth", "path", "remaining")

    def __init__(self, edge, trie, node, depth, path, remaining):
        self.edge = edge
        self.trie = trie
        self.node = node
        self.depth = depth
        self.path = path
        self.remaining = remaining


class _Ctx:
    """Per-invocation state: the query, the meter, and the trie cache."""

    __slots__ = ("q", "meter", "edge_sets", "tries", "audit")

    def __init__(self, q: JoinQuery, meter: CostMeter, audit: bool = False):
        self.q = q
        self.meter = meter
        self.edge_sets = [frozenset(e) for e in q.hypergraph.edges]
        self.tries: dict[tuple[int, tuple[Attribute, ...]], TrieIndex] = {}
        self.audit = audit

    def trie_for(self, edge: int, order: tuple[Attribute, ...]) -> TrieIndex:
        got = self.tries.get((edge, order))
        if got is None:
            got = build_trie(self.q.relations[edge], order)
            self.tries[(edge, order)] = got
        return got

    def initial_views(self) -> list[_View]:
        out = []
        for e, r in enumerate(self.q.relations):
            trie = self.trie_for(e, r.schema)
            out.append(_View(e, trie, trie.root, 0, (), trie.order))
        return out


def _ensure_front(ctx: _Ctx, v: _View, front: tuple[Attribute, ...]) -> _View:
    """Reorder ``v`` so ``front`` leads its remaining attributes.

    Rebuilding under a new order and re-seating the already-bound path
    is index preparation, kept out of the operation counts like the
    initial build; the per-tuple descents that narrow a view stay
    metered.
    """
    if v.remaining[: len(front)] == front:
        return v
    fs = set(front)
    order = v.trie.order[: v.depth] + front + tuple(a for a in v.remaining if a not in fs)
    trie = ctx.trie_for(v.edge, order)
    node = trie.root
    for val in v.path:
        node = node.child(val)
        assert node is not None
    return _View(v.edge, trie, node, v.depth, v.path, trie.order[v.depth :])


def _descend(ctx: _Ctx, v: _View, vals: Sequence[int]) -> _View | None:
    """Narrow a view by binding the next len(vals) attributes."""
    node = v.node
    for val in vals:
        ctx.meter.probes += 1
        node = node.child(val)
        if node is None:
            return None
    k = len(vals)
    return _View(v.edge, v.trie, node, v.depth + k, v.path + tuple(vals), v.remaining[k:])


def _active(ctx: _Ctx, v: _View, attrs: Sequence[Attribute]) -> list[Attribute]:
    es = ctx.edge_sets[v.edge]
    return [a for a in attrs if a in es]


def _audit_split(ctx, views, attrs, weights, i_attrs) -> None:
    """Debug-mode check of the per-level group inequality."""
    from .bounds import decomposition_check
    from .relational import Hypergraph

    edges = []
    rels = []
    ws = []
    for v in views:
        act = tuple(_active(ctx, v, attrs))
        edges.append(act)
        rels.append(Relation(act, tuple(iter_leaves(v.node, len(act)))))
        ws.append(weights[v.edge])
    sub = JoinQuery(Hypergraph(tuple(attrs), tuple(edges)), tuple(rels))
    side = decomposition_check(sub, FractionalCover(tuple(ws)), i_attrs)
    if not side.holds(1e-9):
        raise AssertionError(
            f"group inequality violated at I={i_attrs}: lhs={side.lhs} rhs={side.rhs}"
        )


def _recurse(ctx: _Ctx, views: list[_View], attrs: tuple[Attribute, ...], mode) -> list[Row]:
    meter = ctx.meter
    meter.recursions += 1
    meter.check_deadline()

    if len(attrs) == 1:
        return [(v,) for v in intersect([w.node.keys for w in views], meter)]

    kind, weights = mode[0], mode[-1]
    if kind == "leapfrog":
        i_attrs: tuple[Attribute, ...] = attrs[:1]
        i_mode = j_mode = mode
    elif kind == "fixed-sequence":
        blocks = mode[1]
        if len(blocks) == 1:
            i_attrs = attrs[:1]
            j_blocks: tuple[tuple[Attribute, ...], ...] = (attrs[1:],)
        else:
            i_attrs = blocks[0]
            if not i_attrs or not set(i_attrs) < set(attrs):
                raise InvalidPartitionError(
                    f"block {i_attrs} is not a proper nonempty subset of {attrs}"
                )
            j_blocks = blocks[1:]
        i_mode = ("fixed-sequence", (i_attrs,), weights)
        j_mode = ("fixed-sequence", j_blocks, weights)
    else:  # nprr
        j_edge = max((v.edge for v in views), key=lambda e: (weights[e], -e))
        jset = ctx.edge_sets[j_edge]
        i_attrs = tuple(a for a in attrs if a not in jset)
        if not i_attrs:
            return _nprr_tail(ctx, views, attrs, j_edge, weights)
        i_mode = j_mode = mode  # weight dicts are filtered below

    i_set = set(i_attrs)
    j_attrs = tuple(a for a in attrs if a not in i_set)

    if ctx.audit:
        _audit_split(ctx, views, attrs, weights, i_attrs)

    # Arrange each view so its I attributes lead, then its J attributes.
    iviews: list[_View] = []
    extenders: list[tuple[_View, list[int]]] = []  # J-joining views + their I positions
    ipos = {a: k for k, a in enumerate(i_attrs)}
    for v in views:
        act = _active(ctx, v, attrs)
        fi = [a for a in act if a in i_set]
        fj = [a for a in act if a not in i_set]
        if fi:
            v = _ensure_front(ctx, v, tuple(fi + fj))
            iviews.append(v)
        if fj:
            extenders.append((v, [ipos[a] for a in fi]))

    if kind == "nprr":
        i_mode = ("nprr", {v.edge: weights[v.edge] for v in iviews})
        j_mode = ("nprr", {v.edge: weights[v.edge] for v, _ in extenders})

    groups = _recurse(ctx, iviews, i_attrs, i_mode)

    picks = []  # rebuild output rows over attrs from the (I-part, J-part) pair
    jpos = {a: k for k, a in enumerate(j_attrs)}
    for a in attrs:
        picks.append((0, ipos[a]) if a in i_set else (1, jpos[a]))

    out: list[Row] = []
    for t in groups:
        meter.check_deadline()
        jviews: list[_View] = []
        alive = True
        for v, idxs in extenders:
            if idxs:
                vd = _descend(ctx, v, [t[i] for i in idxs])
                if vd is None:
                    alive = False
                    break
                v = vd
            jviews.append(v)
        if not alive:
            continue
        for r in _recurse(ctx, jviews, j_attrs, j_mode):
            parts = (t, r)
            out.append(tuple(parts[s][i] for s, i in picks))
    return out


def _nprr_tail(
    ctx: _Ctx,
    views: list[_View],
    attrs: tuple[Attribute, ...],
    j_edge: int,
    weights: dict[int, Fraction],
) -> list[Row]:
    """Two-choices solver for a subproblem lying entirely inside edge J.

    Either scan the J view and filter each tuple against the others, or
    join the others and probe each result into J — whichever side the
    p-versus-q estimate says is smaller.
    """
    meter = ctx.meter
    vj = next(v for v in views if v.edge == j_edge)
    others = [v for v in views if v.edge != j_edge]
    x_j = weights[j_edge]
    k = len(attrs)
    pos = {a: i for i, a in enumerate(attrs)}

    scan = True
    if others and x_j < 1:
        p = len(ctx.q.relations[j_edge])
        if p == 0:
            return []
        log_q = 0.0
        rescale = 1 / (1 - x_j)
        empty = False
        for v in others:
            width = len(_active(ctx, v, attrs))
            factor = v.node.pcounts[width - 1]
            meter.probes += 1  # sizing lookup for the branch choice
            if factor == 0:
                empty = True
                break
            log_q += float(weights[v.edge] * rescale) * math.log2(factor)
        if empty:
            return []
        scan = math.log2(p) <= log_q + 1e-9

    probe_plans = []
    for v in others:
        act = _active(ctx, v, attrs)
        probe_plans.append((v.node, [pos[a] for a in act]))

    out: list[Row] = []
    if scan:
        seen = 0
        for t in iter_leaves(vj.node, k):
            meter.probes += 1  # leaf read during the scan
            seen += 1
            if seen & 0x3FF == 0:
                meter.check_deadline()
            ok = True
            for node, idxs in probe_plans:
                for i in idxs:
                    meter.probes += 1
                    node = node.child(t[i])
                    if node is None:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append(t)
        return out

    rescaled = {v.edge: weights[v.edge] * rescale for v in others}
    for t in _recurse(ctx, others, attrs, ("nprr", rescaled)):
        node = vj.node
        for val in t:
            meter.probes += 1
            node = node.child(val)
            if node is None:
                break
        else:
            out.append(t)
    return out


def _resolve(q: JoinQuery, cover, meter) -> tuple[FractionalCover, CostMeter]:
    if cover is None:
        # Empty relations would put log2(0) in the LP objective; any
        # positive stand-in keeps the cover valid (the join is empty
        # regardless), and 1 zeroes the term out.
        sizes = tuple(max(1, s) for s in q.sizes)
        cover = min_cover_lp(q.hypergraph, sizes).cover
    elif not isinstance(cover, FractionalCover):
        cover = FractionalCover(tuple(cover))
    if not is_cover(q.hypergraph, cover):
        raise InfeasibleCoverError(f"weights {cover.weights} do not cover the query")
    return cover, meter if meter is not None else CostMeter()


def generic_join(
    q: JoinQuery,
    strat: PartitionStrategy | None = None,
    cover: FractionalCover | None = None,
    meter: CostMeter | None = None,
    *,
    audit: bool = False,
) -> Relation:
    """Join all relations of ``q`` exactly, metering the work done.

    The base case (one attribute) is a k-way intersection; otherwise
    the strategy picks I, the I-projections are joined recursively into
    groups, and each group tuple is extended over the rest.  The cover
    defaults to the tightest one from the size-bound linear program.
    """
    strat = strat if strat is not None else nprr_strategy()
    cover, meter = _resolve(q, cover, meter)
    ctx = _Ctx(q, meter, audit=audit)
    attrs = q.attrs
    weights = {e: cover[e] for e in range(len(q.relations))}
    if strat.kind == "fixed-sequence":
        flat = [a for b in strat.sequence for a in b]
        if sorted(flat) != list(attrs) or any(not b for b in strat.sequence):
            raise InvalidPartitionError(
                f"blocks {strat.sequence} do not partition the attributes {attrs}"
            )
        mode = ("fixed-sequence", strat.sequence, weights)
    elif strat.kind == "leapfrog":
        mode = ("leapfrog", weights)
    else:
        mode = ("nprr", weights)
    rows = _recurse(ctx, ctx.initial_views(), attrs, mode)
    out = Relation(attrs, tuple(rows))
    meter.emits += len(out)
    return out


def run_join(
    q: JoinQuery,
    strat: PartitionStrategy | None = None,
    cover: FractionalCover | None = None,
    meter: CostMeter | None = None,
    time_budget: float | None = None,
    *,
    audit: bool = False,
) -> JoinRun:
    """``generic_join`` plus the run record used by benchmarks."""
    strat = strat if strat is not None else nprr_strategy()
    cover, meter = _resolve(q, cover, meter)
    if time_budget is not None:
        meter.start_deadline(time_budget)
    out = generic_join(q, strat, cover, meter, audit=audit)
    return JoinRun(out, meter, strat, cover)


def nprr_choose(q: JoinQuery, cover: FractionalCover) -> tuple[int, tuple[Attribute, ...]]:
    """Pick the split edge: heaviest cover weight, ties to the lowest index.

    Returns the edge index J and the complementary attribute set
    I = V - J (empty when that edge spans every attribute, in which
    case the group solver handles the whole query).
    """
    if len(cover.weights) != len(q.relations):
        raise MalformedCoverError(
            f"{len(cover.weights)} weights for {len(q.relations)} edges"
        )
    weights = {e: cover[e] for e in range(len(q.relations))}
    j = max(weights, key=lambda e: (weights[e], -e))
    jset = set(q.hypergraph.edges[j])
    return j, tuple(a for a in q.attrs if a not in jset)


def nprr_subquery(
    q: JoinQuery,
    j_edge: int,
    x: FractionalCover,
    meter: CostMeter | None = None,
) -> Relation:
    """Solve a subproblem contained in edge ``j_edge`` by two choices.

    ``q`` is the already-narrowed query (every attribute inside the
    chosen edge); ``x`` is its cover.  With x_J >= 1 the J relation is
    scanned and filtered; below 1, scanning competes against joining
    the other relations with weights rescaled by 1/(1 - x_J) and
    probing into J, and the cheaper estimate wins.
    """
    if not 0 <= j_edge < len(q.relations):
        raise InvalidPartitionError(f"no edge {j_edge} in the query")
    if not set(q.attrs) <= set(q.hypergraph.edges[j_edge]):
        raise InvalidPartitionError("subproblem attributes must lie inside the chosen edge")
    x, meter = _resolve(q, x, meter)
    ctx = _Ctx(q, meter)
    weights = {e: x[e] for e in range(len(q.relations))}
    rows = _nprr_tail(ctx, ctx.initial_views(), q.attrs, j_edge, weights)
    out = Relation(q.attrs, tuple(rows))
    meter.emits += len(out)
    return out


def _triangle_schemas(r: Relation, s: Relation, t: Relation):
    if not (r.arity == s.arity == t.arity == 2):
        raise SchemaError("triangle solvers need three binary relations")
    a, b = r.schema
    b2, c = s.schema
    a2, c2 = t.schema
    if not (a == a2 and b == b2 and c == c2 and len({a, b, c}) == 3):
        raise SchemaError(
            f"schemas {r.schema}, {s.schema}, {t.schema} do not form a triangle"
        )
    return a, b, c


def triangle_two_choices(
    r: Relation, s: Relation, t: Relation, meter: CostMeter | None = None
) -> Relation:
    """Triangle join choosing per-vertex between scanning S and probing it.

    For each a shared by R and T, a is heavy when the number of (b, c)
    candidate pairs reaches |S|; then S is scanned and each tuple is
    checked against the candidates, otherwise the candidate pairs are
    enumerated and probed into S.  Either way the work per a is about
    min(|R narrowed to a| * |T narrowed to a|, |S|).
    """
    a_attr, b_attr, c_attr = _triangle_schemas(r, s, t)
    meter = meter if meter is not None else CostMeter()
    ixr, ixs, ixt = build_trie(r), build_trie(s), build_trie(t)
    out: list[Row] = []
    n_s = len(s)
    for a in intersect([ixr.root.keys, ixt.root.keys], meter):
        meter.check_deadline()
        meter.probes += 2
        nr = ixr.root.child(a)
        nt = ixt.root.child(a)
        if nr.size * nt.size >= n_s:
            for b, c in s.rows:
                meter.probes += 1  # scan read
                if nr.child(b) is not None and nt.child(c) is not None:
                    out.append((a, b, c))
                meter.probes += 2
        else:
            for b in nr.keys:
                ns = ixs.root.child(b)
                meter.probes += 1
                if ns is None:
                    continue
                for c in nt.keys:
                    meter.probes += 1
                    if ns.child(c) is not None:
                        out.append((a, b, c))
    rel = Relation((a_attr, b_attr, c_attr), tuple(out))
    meter.emits += len(rel)
    return rel


def triangle_delay(
    r: Relation, s: Relation, t: Relation, meter: CostMeter | None = None
) -> Relation:
    """Triangle join by nested intersections, one attribute at a time.

    Candidate a values are shared by R and T; under each a, candidate b
    values are shared by the narrowed R and S; under each (a, b) the c
    values are shared by the narrowed S and T.
    """
    a_attr, b_attr, c_attr = _triangle_schemas(r, s, t)
    meter = meter if meter is not None else CostMeter()
    ixr, ixs, ixt = build_trie(r), build_trie(s), build_trie(t)
    out: list[Row] = []
    for a in intersect([ixr.root.keys, ixt.root.keys], meter):
        meter.check_deadline()
        meter.probes += 2
        nr = ixr.root.child(a)
        nt = ixt.root.child(a)
        for b in intersect([nr.keys, ixs.root.keys], meter):
            meter.probes += 1
            ns = ixs.root.child(b)
            for c in intersect([ns.keys, nt.keys], meter):
                out.append((a, b, c))
    rel = Relation((a_attr, b_attr, c_attr), tuple(out))
    meter.emits += len(rel)
    return rel
