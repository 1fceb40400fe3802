"""Worked separation: WCOJ stays near-linear where every pairwise plan is quadratic.

The adversarial triangle instance has m heavy rows per table arranged so
that any two-table join materializes ~m^2 tuples before the third table
cuts the result back to 3m+1.  The attribute-at-a-time engines never
build that intermediate.  Doubling m and fitting log(ops) against log(m)
makes the gap visible as an exponent.

    python3 scripts/triangle_separation.py --max-exp 12
"""

import argparse

from agmjoin import (
    execute_plan,
    gen_triangle_bad,
    leapfrog_strategy,
    nprr_strategy,
    run_join,
    triangle_plans,
)
from agmjoin.cli import fit_exponent

PLAN_NAMES = ["(R><T)><S", "(R><S)><T", "(S><T)><R"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-exp", type=int, default=4, help="smallest m = 2**e")
    ap.add_argument("--max-exp", type=int, default=12, help="largest m = 2**e")
    args = ap.parse_args()

    ms = [2**e for e in range(args.min_exp, args.max_exp + 1)]
    columns = ["nprr", "leapfrog", *PLAN_NAMES]
    series: dict[str, list[int]] = {c: [] for c in columns}
    inter_max: list[int] = []

    header = f"{'m':>6} " + " ".join(f"{c:>12}" for c in columns) + f" {'max-inter':>10}"
    print(header)
    for m in ms:
        q = gen_triangle_bad(m).query
        row = [m]
        for name, strat in (("nprr", nprr_strategy()), ("leapfrog", leapfrog_strategy())):
            run = run_join(q, strat)
            assert len(run.output) == 3 * m + 1
            series[name].append(run.meter.total_ops)
            row.append(run.meter.total_ops)
        worst = 0
        for name, plan in zip(PLAN_NAMES, triangle_plans()):
            _, trace = execute_plan(plan, q.relations)
            series[name].append(trace.total_work)
            row.append(trace.total_work)
            worst = max(worst, trace.intermediate_max)
        inter_max.append(worst)
        print(f"{row[0]:>6} " + " ".join(f"{v:>12}" for v in row[1:]) + f" {worst:>10}")

    print()
    print("fitted exponent of ops vs m (largest half of the points):")
    for name in columns:
        exponent, resid = fit_exponent(ms, series[name])
        print(f"  {name:<12} {exponent:6.3f}   (residual {resid:.4f})")
    print()
    print(f"every pairwise intermediate reached at least m^2 rows: "
          f"{all(w >= m * m for w, m in zip(inter_max, ms))}")


if __name__ == "__main__":
    main()
