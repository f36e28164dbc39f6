"""Shared strategies and deterministic instance batches for the test suite."""

import random

from hypothesis import strategies as st

from affordable_committees.core import Instance
from affordable_committees.generators import gen_random


@st.composite
def instances(draw, max_n=8, max_m=6, min_n=1):
    m = draw(st.integers(1, max_m))
    k = draw(st.integers(1, m))
    n = draw(st.integers(min_n, max_n))
    ballots = draw(st.lists(st.sets(st.integers(0, m - 1)), min_size=n, max_size=n))
    return Instance.from_lists(m, k, ballots)


@st.composite
def instance_and_committee(draw, max_n=8, max_m=6, size=None):
    inst = draw(instances(max_n=max_n, max_m=max_m))
    top = inst.k if size is None else min(size, inst.k)
    w = draw(st.lists(st.integers(0, inst.m - 1), unique=True, max_size=top))
    return inst, w


def random_instances(count, seed, n=(1, 12), m=(1, 8), k_max=None, p=(0.1, 0.6)):
    """Deterministic mix of uniform and party-block profiles."""
    rng = random.Random(seed)
    out = []
    for t in range(count):
        mm = rng.randint(*m)
        kk = rng.randint(1, mm if k_max is None else min(mm, k_max))
        nn = rng.randint(*n)
        if t % 3 == 2:
            out.append(gen_random(nn, mm, kk, "party-blocks", rng.randrange(2**32),
                                  groups=rng.randint(1, mm), noise=rng.uniform(0, 0.3)))
        else:
            out.append(gen_random(nn, mm, kk, "uniform-p", rng.randrange(2**32), p=rng.uniform(*p)))
    return out
