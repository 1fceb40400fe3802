import os
import random

import pytest
from hypothesis import HealthCheck, settings

from agmjoin import FractionalCover, JoinQuery, gen_random, min_cover_lp

settings.register_profile(
    "ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


def random_instance(seed: int, max_n: int = 4, max_m: int = 4, max_rows: int = 12,
                    max_domain: int = 6) -> JoinQuery:
    """Small seeded join query; shapes and data come from the package generator.

    A drawn size can exceed what a narrow relation can hold distinctly
    (the generator refuses more rows than domain**arity); redraw until
    the combination fits.  Deterministic for a given seed.
    """
    from agmjoin import GeneratorParameterError

    rng = random.Random(seed)
    while True:
        n = rng.randint(2, max_n)
        m = rng.randint(1, max_m)
        sizes = [rng.randint(0, max_rows) for _ in range(m)]
        domain = rng.randint(2, max_domain)
        try:
            return gen_random(seed, n, m, sizes, domain).query
        except GeneratorParameterError:
            continue


def random_feasible_cover(q: JoinQuery, rng: random.Random) -> FractionalCover:
    """A random point of the cover polyhedron.

    Convex mixes of covers are covers and adding weight never breaks
    feasibility, so mix the all-ones cover with the LP optimum and
    sprinkle bumps.
    """
    from fractions import Fraction

    ones = [Fraction(1)] * len(q.relations)
    sizes = [max(1, len(r)) for r in q.relations]
    opt = min_cover_lp(q.hypergraph, sizes).cover.weights
    lam = Fraction(rng.randint(0, 8), 8)
    mixed = [lam * a + (1 - lam) * b for a, b in zip(ones, opt)]
    return FractionalCover(
        tuple(w + Fraction(rng.randint(0, 4), 8) for w in mixed)
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xA6A)
