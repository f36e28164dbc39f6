"""Proportionality axioms, representativeness and maximin support."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Literal, Sequence

from .core import CommitteeLike, Instance, ResourceLimitError, members_of, utilities
from .flow import FlowNetwork

DEFAULT_SUBSET_LIMIT = 2_000_000


@dataclass(frozen=True)
class AxiomWitness:
    group: frozenset[int]
    candidates: tuple[int, ...]
    level: int


@dataclass(frozen=True)
class AxiomVerdict:
    holds: bool
    witness: AxiomWitness | None = None
    violations: tuple[AxiomWitness, ...] = ()

    def __bool__(self) -> bool:
        return self.holds


def _verdict(violations: list[AxiomWitness]) -> AxiomVerdict:
    return AxiomVerdict(not violations, violations[0] if violations else None, tuple(violations))


def check_ejr_plus(inst: Instance, w: CommitteeLike, first_only: bool = False) -> AxiomVerdict:
    """Polynomial EJR+ check: a violation is an unselected ``c`` and level ``ell`` such that
    the approvers of ``c`` with fewer than ``ell`` approved members form an ``ell``-large group.
    """
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    found: list[AxiomWitness] = []
    for c in inst.candidates:
        if c in members:
            continue
        for ell in range(1, inst.k + 1):
            group = frozenset(i for i in inst.approvers[c] if util[i] < ell)
            if inst.is_large(len(group), ell):
                found.append(AxiomWitness(group, (c,), ell))
                if first_only:
                    return _verdict(found)
    return _verdict(found)


def check_ejr(
    inst: Instance,
    w: CommitteeLike,
    first_only: bool = False,
    max_level: int | None = None,
    subset_limit: int | None = DEFAULT_SUBSET_LIMIT,
) -> AxiomVerdict:
    """Exact EJR check by searching candidate sets ``T`` with ``|T| = ell``.

    A violation is ``(T, ell)`` where the voters approving all of ``T`` with
    fewer than ``ell`` approved members form an ``ell``-large group.
    """
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    top = inst.k if max_level is None else max_level
    found: list[AxiomWitness] = []
    nodes = 0

    for ell in range(1, top + 1):
        poor = 0
        for i, u in enumerate(util):
            if u < ell:
                poor |= 1 << i
        if not inst.is_large(poor.bit_count(), ell):
            continue
        pool = [c for c in inst.candidates if inst.is_large((inst.masks[c] & poor).bit_count(), ell)]

        def dfs(start: int, mask: int, chosen: list[int]) -> bool:
            nonlocal nodes
            nodes += 1
            if subset_limit is not None and nodes > subset_limit:
                raise ResourceLimitError(f"EJR subset search exceeded {subset_limit} nodes")
            if not inst.is_large(mask.bit_count(), ell):
                return False
            if len(chosen) == ell:
                group = frozenset(i for i in range(inst.n) if mask >> i & 1)
                found.append(AxiomWitness(group, tuple(chosen), ell))
                return first_only
            for pos in range(start, len(pool) - (ell - len(chosen)) + 1):
                chosen.append(pool[pos])
                stop = dfs(pos + 1, mask & inst.masks[pool[pos]], chosen)
                chosen.pop()
                if stop:
                    return True
            return False

        if dfs(0, poor, []) and first_only:
            break
    return _verdict(found)


def check_jr(inst: Instance, w: CommitteeLike, first_only: bool = False) -> AxiomVerdict:
    return check_ejr(inst, w, first_only=first_only, max_level=1)


def check_ejr_plus_brute(inst: Instance, w: CommitteeLike) -> bool:
    """EJR+ straight from the definition, enumerating every voter group (tiny ``n`` only)."""
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    for size in range(1, inst.n + 1):
        for group in combinations(range(inst.n), size):
            common = frozenset.intersection(*(inst.approvals[i] for i in group))
            if not common:
                continue
            for ell in range(1, inst.k + 1):
                if not inst.is_large(size, ell):
                    break
                if all(util[i] < ell for i in group) and not common <= members:
                    return False
    return True


def check_ejr_brute(inst: Instance, w: CommitteeLike) -> bool:
    """EJR straight from the definition over voter groups (tiny ``n`` only)."""
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    for size in range(1, inst.n + 1):
        for group in combinations(range(inst.n), size):
            common = frozenset.intersection(*(inst.approvals[i] for i in group))
            for ell in range(1, len(common) + 1):
                if inst.is_large(size, ell) and all(util[i] < ell for i in group):
                    return False
    return True


# -- representativeness ------------------------------------------------------


def representativeness_profile(inst: Instance, w: CommitteeLike) -> list[Fraction | float]:
    """Entry ``ell-1``: worst average utility over ``ell``-large subgroups of any ``N_c``, c not in W.

    ``math.inf`` when no unselected candidate has an ``ell``-large approver set.
    The minimum over subgroups is the mean of the ``ceil(ell*n/k)`` smallest utilities.
    """
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    sorted_utils = {
        c: sorted(util[i] for i in inst.approvers[c]) for c in inst.candidates if c not in members
    }
    profile: list[Fraction | float] = []
    for ell in range(1, inst.k + 1):
        need = -(-ell * inst.n // inst.k)
        best: Fraction | float = math.inf
        for us in sorted_utils.values():
            if len(us) >= need:
                best = min(best, Fraction(sum(us[:need]), need))
        profile.append(best)
    return profile


def representativeness_brute(inst: Instance, w: CommitteeLike) -> list[Fraction | float]:
    """Same quantity as ``representativeness_profile`` by enumerating every subgroup."""
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    profile: list[Fraction | float] = []
    for ell in range(1, inst.k + 1):
        best: Fraction | float = math.inf
        for c in inst.candidates:
            if c in members:
                continue
            voters = sorted(inst.approvers[c])
            for size in range(1, len(voters) + 1):
                if not inst.is_large(size, ell):
                    continue
                for group in combinations(voters, size):
                    best = min(best, Fraction(sum(util[i] for i in group), size))
        profile.append(best)
    return profile


def is_f_representative(inst: Instance, w: CommitteeLike, f: Sequence[Fraction]) -> AxiomVerdict:
    """``f[ell-1]`` is the required average for level ``ell``; witness is a worst subgroup."""
    if len(f) != inst.k:
        raise ValueError(f"need one target per level 1..{inst.k}, got {len(f)}")
    members = members_of(inst, w, allow_oversize=True)
    util = utilities(inst, members)
    found = []
    for ell in range(1, inst.k + 1):
        need = -(-ell * inst.n // inst.k)
        for c in inst.candidates:
            if c in members or len(inst.approvers[c]) < need:
                continue
            group = sorted(inst.approvers[c], key=lambda i: (util[i], i))[:need]
            if Fraction(sum(util[i] for i in group), need) < f[ell - 1]:
                found.append(AxiomWitness(frozenset(group), (c,), ell))
    return _verdict(found)


# -- maximin support ---------------------------------------------------------


def _support_cut(inst: Instance, members: Sequence[int], t: Fraction) -> list[int] | None:
    """``None`` if every member can receive ``t`` units from unit-capacity approvers;
    otherwise a Hall-violating member subset ``S`` with ``|N(S)| < t*|S|``."""
    a, b = t.numerator, t.denominator
    s, sink = 0, 1
    net = FlowNetwork(2 + len(members) + inst.n)
    big = a * len(members) + 1
    for j, c in enumerate(members):
        net.add_edge(s, 2 + j, a)
        for i in inst.approvers[c]:
            net.add_edge(2 + j, 2 + len(members) + i, big)
    for i in range(inst.n):
        net.add_edge(2 + len(members) + i, sink, b)
    if net.max_flow(s, sink) >= a * len(members):
        return None
    side = net.reachable(s)
    return [c for j, c in enumerate(members) if 2 + j in side]


def maximin_support(
    inst: Instance, w: CommitteeLike, method: Literal["flow", "brute"] = "flow"
) -> Fraction:
    """min over non-empty S within W of |{i : A_i meets S}| / |S|."""
    members = sorted(members_of(inst, w, allow_oversize=True))
    if not members:
        raise ValueError("maximin support is undefined for the empty committee")
    if method == "brute":
        return _support_brute(inst, members)
    if method != "flow":
        raise ValueError(f"unknown method {method!r}")
    # ratio descent: each failed flow check exposes a subset with a strictly smaller ratio
    subset = members
    while True:
        mask = 0
        for c in subset:
            mask |= inst.masks[c]
        t = Fraction(mask.bit_count(), len(subset))
        if t == 0:
            return t
        cut = _support_cut(inst, members, t)
        if cut is None:
            return t
        subset = cut


def _support_brute(inst: Instance, members: Sequence[int]) -> Fraction:
    size = len(members)
    cover = [0] * (1 << size)
    best = None
    for s in range(1, 1 << size):
        low = s & -s
        cover[s] = cover[s ^ low] | inst.masks[members[low.bit_length() - 1]]
        val = Fraction(cover[s].bit_count(), s.bit_count())
        if best is None or val < best:
            best = val
    return best
