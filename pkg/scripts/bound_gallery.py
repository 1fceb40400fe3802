"""Optimal fractional covers and output-size bounds for a few named queries.

Prints, for each query shape at table size N, the LP-optimal cover
weights and the resulting bound.  Handy for sanity-checking how the
bound moves between shapes (N^(3/2) for the triangle, N^(n/2) for
cliques, N^(1+1/(n-1)) when each table misses one attribute).

    python3 scripts/bound_gallery.py --size 64
"""

import argparse

from agmjoin import (
    Hypergraph,
    gen_clique_query,
    gen_lw_query,
    make_attrs,
    min_cover_lp,
)

A, B, C = make_attrs("A", "B", "C")


def gallery(n: int):
    triangle = Hypergraph((A, B, C), ((A, B), (B, C), (A, C)))
    w, x, y, z = make_attrs("W", "X", "Y", "Z")
    star = Hypergraph((w, x, y, z), ((w, x), (w, y), (w, z)))
    yield "triangle", triangle, (n, n, n)
    yield "triangle, unit R and T", triangle, (1, n, 1)
    yield "star Q(W)->X,Y,Z", star, (n, n, n)
    for k in (4, 5):
        h = gen_clique_query(k, 2).query.hypergraph
        yield f"{k}-clique", h, (n,) * len(h.edges)
    for k in (3, 4):
        h = gen_lw_query(k, 2).query.hypergraph
        yield f"miss-one-of-{k}", h, (n,) * k


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="table size N")
    args = ap.parse_args()

    for name, h, sizes in gallery(args.size):
        rep = min_cover_lp(h, sizes)
        weights = ", ".join(str(w) for w in rep.cover.weights)
        print(f"{name:<24} cover [{weights}]")
        print(f"{'':<24} log2 bound {float(rep.log2_bound):.4f}  bound {rep.bound:.4f}")


if __name__ == "__main__":
    main()
