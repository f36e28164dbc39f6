"""Worked-example instances, adversarial constructions, random profiles and brute-force optima."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Literal

from .core import (
    Committee,
    Instance,
    ParameterError,
    ResourceLimitError,
)

DEFAULT_ENUMERATION_LIMIT = 2_000_000


def gen_fig1() -> Instance:
    """24 voters, 22 candidates, k = 12. Indices are 0-based: voter v is ``v-1``, c_j is ``j-1``."""
    voters: list[set[int]] = [set() for _ in range(24)]

    def give(cands: range | list[int], first: int, last: int) -> None:
        for v in range(first, last + 1):
            voters[v - 1].update(c - 1 for c in cands)

    for j in range(1, 5):
        give([j], j, j)
    give([5, 6], 6, 12)
    give([7, 8], 9, 15)
    give([9], 5, 10)
    give([10], 11, 16)
    give(range(11, 23), 17, 24)
    return Instance.from_lists(22, 12, voters)


def gen_ex62() -> Instance:
    """Six voters, three candidates each approved by a disjoint pair, k = 2."""
    return Instance.from_lists(3, 2, [[0], [0], [1], [1], [2], [2]])


def gen_vary_budget_clones(k: int, group_size: int = 2) -> Instance:
    """Budget-variation tightness family: k+1 disjoint voter groups; the first group
    approves k clone candidates (lowest indices), every other group one candidate."""
    if k < 1 or group_size < 1:
        raise ParameterError("k and group_size must be positive")
    voters = []
    for _ in range(group_size):
        voters.append(list(range(k)))
    for g in range(k):
        voters += [[k + g]] * group_size
    return Instance.from_lists(2 * k, k, voters)


def gen_perturbation_tight(n: int, k: int) -> Instance:
    """n/(2k) voters share k candidates; every other voter has a private candidate.

    Private candidates get the lowest indices and the shared ones come last, so
    lowest-index tie-breaking favours private candidates.
    """
    if k < 1 or n % (2 * k):
        raise ParameterError("n must be a positive multiple of 2k")
    shared = n // (2 * k)
    singles = n - shared
    voters = [list(range(singles, singles + k)) for _ in range(shared)]
    voters += [[j] for j in range(singles)]
    return Instance.from_lists(k + singles, k, voters)


def gen_mms_ejr(k: int) -> Instance:
    """2k voters and candidates: voter i < k approves only c_i; voter k+i approves c_i and c_k..c_{2k-1}."""
    if k < 1:
        raise ParameterError("k must be positive")
    voters = [[i] for i in range(k)]
    voters += [[i] + list(range(k, 2 * k)) for i in range(k)]
    return Instance.from_lists(2 * k, k, voters)


def gen_bpriceable_lb(n: int, k: int) -> Instance:
    """n/2+1 voters approve c_0..c_{k-1}; k groups of (n/2-1)/k voters approve one private candidate each."""
    if n % 2 or n < 4 or k < 1 or (n // 2 - 1) % k:
        raise ParameterError("need n even and k dividing n/2 - 1")
    group = (n // 2 - 1) // k
    if group < 1:
        raise ParameterError("groups would be empty")
    voters = [list(range(k)) for _ in range(n // 2 + 1)]
    for g in range(k):
        voters += [[k + g]] * group
    return Instance.from_lists(2 * k, k, voters)


def _exact_power(k: int, exponent: Fraction) -> int:
    p, q = exponent.numerator, exponent.denominator
    target = k**p
    root = round(target ** (1 / q))
    for r in (root - 1, root, root + 1):
        if r >= 0 and r**q == target:
            return r
    raise ParameterError(f"{k}^{exponent} is not an integer")


def gen_ejr_hard(k: int, c: Fraction) -> Instance:
    """2k candidates; one voter per (k/2)-subset of the first k (lexicographic order);
    voters and the last k candidates split into k^(1-c) blocks, block j approving its k^c candidates."""
    c = Fraction(c)
    if k < 2 or k % 2 or not 0 < c < 1:
        raise ParameterError("need even k and 0 < c < 1")
    per_block = _exact_power(k, c)
    blocks = _exact_power(k, 1 - c)
    n = comb(k, k // 2)
    if n % blocks:
        raise ParameterError("voters do not split evenly into blocks")
    size = n // blocks
    voters = []
    for idx, subset in enumerate(combinations(range(k), k // 2)):
        b = idx // size
        voters.append(list(subset) + [k + b * per_block + j for j in range(per_block)])
    return Instance.from_lists(2 * k, k, voters)


def gen_random(
    n: int,
    m: int,
    k: int,
    model: Literal["uniform-p", "party-blocks"] = "uniform-p",
    seed: int = 0,
    p: float = 0.3,
    groups: int = 2,
    noise: float = 0.0,
) -> Instance:
    """Reproducible random profile.

    ``uniform-p``: every voter approves every candidate independently with probability ``p``.
    ``party-blocks``: candidates are split into ``groups`` contiguous blocks; each voter
    joins a uniformly random party and approves its block, plus each other candidate
    with probability ``noise``.
    """
    if n < 1 or m < 1 or not 1 <= k <= m:
        raise ParameterError("need n >= 1 and 1 <= k <= m")
    rng = random.Random(seed)
    voters: list[list[int]] = []
    if model == "uniform-p":
        if not 0 <= p <= 1:
            raise ParameterError("p must lie in [0, 1]")
        for _ in range(n):
            voters.append([c for c in range(m) if rng.random() < p])
    elif model == "party-blocks":
        if not 1 <= groups <= m or not 0 <= noise <= 1:
            raise ParameterError("need 1 <= groups <= m and noise in [0, 1]")
        bounds = [g * m // groups for g in range(groups + 1)]
        for _ in range(n):
            g = rng.randrange(groups)
            block = set(range(bounds[g], bounds[g + 1]))
            extra = {c for c in range(m) if c not in block and rng.random() < noise}
            voters.append(sorted(block | extra))
    else:
        raise ParameterError(f"unknown model {model!r}")
    return Instance.from_lists(m, k, voters)


def brute_force_opt(
    inst: Instance,
    objective: Literal["welfare", "coverage", "supp"],
    limit: int | None = DEFAULT_ENUMERATION_LIMIT,
) -> tuple[Fraction | int, Committee]:
    """Enumerate every size-k committee; the lexicographically first optimum wins."""
    total = comb(inst.m, inst.k)
    if limit is not None and total > limit:
        raise ResourceLimitError(f"C({inst.m},{inst.k}) = {total} committees exceed limit {limit}")
    if objective == "welfare":
        scores = [inst.approval_score(c) for c in inst.candidates]
        value = lambda w: sum(scores[c] for c in w)  # noqa: E731
    elif objective == "coverage":
        masks = inst.masks

        def value(w):
            mask = 0
            for c in w:
                mask |= masks[c]
            return mask.bit_count()

    elif objective == "supp":
        from .axioms import maximin_support

        value = lambda w: maximin_support(inst, w, method="brute")  # noqa: E731
    else:
        raise ValueError(f"unknown objective {objective!r}")
    best, best_w = None, None
    for w in combinations(range(inst.m), inst.k):
        v = value(w)
        if best is None or v > best:
            best, best_w = v, w
    return best, Committee.of(best_w, f"brute:{objective}")
