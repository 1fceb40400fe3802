"""Worst-case-optimal natural joins with a fractional-cover size-bound toolkit.

The package is organized bottom-up:

* ``relational`` — attributes, relations, hypergraphs, and the slow
  reference operations every fast path is checked against.
* ``trie`` — sorted trie indexes and the metered intersection/probe
  primitives all engines share.
* ``simplex`` / ``bounds`` — exact-rational covering LPs, the
  fractional-cover size bound, and the group-decomposition audit.
* ``engine`` — the recursive join with nprr / leapfrog /
  fixed-sequence partitioning plus the two triangle specializations.
* ``plans`` — classical two-way join plans and the bound-driven
  join-project evaluator, for comparison runs.
* ``rewrite`` — conjunctive queries with simple functional
  dependencies, rewritten until the plain size bound is tight.
* ``instances`` — reproducible generators for the worked examples and
  the adversarial families used in benchmarks.
* ``cli`` — the ``agmjoin`` command: run, bound, bench, gen.
"""

from .bounds import (
    BoundReport,
    FractionalCover,
    agm_bound,
    cover,
    decomposition_check,
    edge_subset,
    is_cover,
    log2_fraction,
    min_cover_lp,
)
from .engine import (
    JoinRun,
    PartitionStrategy,
    fixed_sequence_strategy,
    generic_join,
    leapfrog_strategy,
    nprr_choose,
    nprr_strategy,
    nprr_subquery,
    run_join,
    triangle_delay,
    triangle_two_choices,
)
from .errors import (
    AgmJoinError,
    GeneratorParameterError,
    InfeasibleCoverError,
    InvalidPartitionError,
    MalformedCoverError,
    PlanError,
    QueryFormatError,
    SchemaError,
    TimeBudgetExceeded,
)
from .instances import (
    InstanceBundle,
    gen_chase_witness,
    gen_clique_query,
    gen_lw_bad,
    gen_lw_query,
    gen_random,
    gen_triangle_bad,
)
from .plans import (
    JoinRecord,
    PlanTrace,
    PlanTree,
    agm_join_project,
    agm_join_project_traced,
    all_join_plans,
    execute_plan,
    is_simple,
    join,
    leaf,
    triangle_plans,
)
from .relational import (
    Attribute,
    Hypergraph,
    JoinQuery,
    Relation,
    attrs_sorted,
    join_query,
    make_attrs,
    natural_join,
    oracle_join,
    project,
    relation,
    select,
    semijoin,
)
from .rewrite import (
    Atom,
    ConjunctiveQuery,
    HeadJoin,
    SimpleFD,
    chase,
    cq_bound,
    dedup_symbols,
    drop_repeated_vars,
    evaluate_cq,
    fd_extend,
    normalize,
    project_to_head,
)
from .trie import (
    CostMeter,
    TrieIndex,
    build_trie,
    children,
    count_prefix,
    intersect,
    iter_leaves,
    probe,
    walk,
)

__all__ = [name for name in dir() if not name.startswith("_")]
