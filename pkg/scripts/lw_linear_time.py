"""Linear-time behavior on the simple-relation family that breaks join-project plans.

Each table holds every tuple with at most one non-zero value, so any
pairwise join of two tables already has (1+d)^2 rows while the final
output is only N+d.  The metered engine should stay within a small
constant of n^2 * N operations.

    python3 scripts/lw_linear_time.py --ns 3 4 5 --ds 64 128 256
"""

import argparse

from agmjoin import execute_plan, gen_lw_bad, join, leaf, run_join


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[3, 4, 5],
                    help="attribute counts (each table misses one attribute)")
    ap.add_argument("--ds", type=int, nargs="+", default=[64, 128, 256],
                    help="non-zero values per coordinate")
    args = ap.parse_args()

    print(f"{'n':>3} {'d':>6} {'N':>7} {'output':>8} {'total_ops':>10} "
          f"{'ops/(n^2 N)':>12} {'first-join':>10} {'(1+d)^2':>9}")
    for n in args.ns:
        for d in args.ds:
            big_n = d * (n - 1) + 1
            q = gen_lw_bad(n, big_n).query
            run = run_join(q)
            assert len(run.output) == big_n + d
            ratio = run.meter.total_ops / (n * n * big_n)
            # one representative pairwise start: join the first two tables
            _, trace = execute_plan(join(leaf(0), leaf(1)), q.relations[:2])
            print(f"{n:>3} {d:>6} {big_n:>7} {len(run.output):>8} "
                  f"{run.meter.total_ops:>10} {ratio:>12.3f} "
                  f"{trace.intermediate_max:>10} {(1 + d) ** 2:>9}")


if __name__ == "__main__":
    main()
