"""Approval-based multiwinner voting rules.

Every rule is deterministic: ties are broken towards the lowest candidate
index (lexicographically smallest member list for ``cc_exact``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import Committee, Instance, ResourceLimitError, covered_mask, members_of
from .payments import PaymentSystem

DEFAULT_NODE_LIMIT = 2_000_000


@dataclass(frozen=True)
class SelectionEvent:
    candidate: int
    value: Fraction  # price rho, score, or election time depending on the rule
    supporters: frozenset[int]


@dataclass(frozen=True)
class RuleOutput:
    committee: Committee
    payments: PaymentSystem | None = None
    trace: tuple[SelectionEvent, ...] = ()
    exhaustive: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def members(self) -> tuple[int, ...]:
        return self.committee.members


def _output(inst: Instance, name: str, trace: Sequence[SelectionEvent], payments=None, **extra) -> RuleOutput:
    members = [ev.candidate for ev in trace]
    return RuleOutput(
        committee=Committee.of(members, f"base:{name}"),
        payments=payments,
        trace=tuple(trace),
        exhaustive=len(members) == inst.k,
        extra=extra,
    )


# -- utilitarian / coverage rules -------------------------------------------


def top_by_approval(inst: Instance, exclude: Iterable[int], count: int) -> list[int]:
    """The ``count`` highest-scoring candidates outside ``exclude`` (ties: lowest index)."""
    excluded = set(exclude)
    pool = [c for c in inst.candidates if c not in excluded]
    pool.sort(key=lambda c: (-inst.approval_score(c), c))
    return pool[:count]


def av(inst: Instance) -> RuleOutput:
    picks = top_by_approval(inst, (), inst.k)
    trace = [SelectionEvent(c, Fraction(inst.approval_score(c)), inst.approvers[c]) for c in picks]
    return _output(inst, "av", trace)


def max_coverage(
    masks: dict[int, int],
    size: int,
    covered: int = 0,
    node_limit: int | None = DEFAULT_NODE_LIMIT,
) -> tuple[int, tuple[int, ...]]:
    """Choose ``size`` keys of ``masks`` maximising newly covered voters beyond ``covered``.

    Returns ``(gain, members)`` where ``members`` is the lexicographically
    smallest optimal choice. Exact branch-and-bound; raises
    ``ResourceLimitError`` once ``node_limit`` search nodes are exceeded.
    """
    cands = sorted(masks)
    if size > len(cands):
        raise ValueError(f"cannot choose {size} of {len(cands)} candidates")
    if size == 0:
        return 0, ()
    local = {c: masks[c] & ~covered for c in cands}
    nodes = 0

    def tick() -> None:
        nonlocal nodes
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise ResourceLimitError(f"max-coverage search exceeded {node_limit} nodes")

    # greedy seed
    cov, pool = 0, list(cands)
    for _ in range(size):
        best = max(pool, key=lambda c: ((local[c] & ~cov).bit_count(), -c))
        cov |= local[best]
        pool.remove(best)
    best_value = cov.bit_count()

    def upper_bound(cov: int, pool: Sequence[int], left: int) -> int:
        gains = sorted(((local[c] & ~cov).bit_count() for c in pool), reverse=True)
        union = 0
        for c in pool:
            union |= local[c]
        base = cov.bit_count()
        return base + min(sum(gains[:left]), (union & ~cov).bit_count())

    # phase 1: optimum value, branching on the largest marginal gain first
    def search(cov: int, pool: list[int], left: int) -> None:
        nonlocal best_value
        tick()
        if left == 0 or not pool:
            best_value = max(best_value, cov.bit_count())
            return
        if upper_bound(cov, pool, left) <= best_value:
            return
        x = max(pool, key=lambda c: ((local[c] & ~cov).bit_count(), -c))
        rest = [c for c in pool if c != x]
        search(cov | local[x], rest, left - 1)
        if len(rest) >= left:
            search(cov, rest, left)

    search(0, cands, size)
    target = best_value

    # phase 2: lexicographically first committee reaching the optimum
    def lex(cov: int, start: int, left: int, chosen: list[int]) -> tuple[int, ...] | None:
        tick()
        if left == 0:
            return tuple(chosen) if cov.bit_count() >= target else None
        rest = cands[start:]
        if len(rest) < left or upper_bound(cov, rest, left) < target:
            return None
        for pos in range(start, len(cands) - left + 1):
            c = cands[pos]
            chosen.append(c)
            found = lex(cov | local[c], pos + 1, left - 1, chosen)
            chosen.pop()
            if found is not None:
                return found
        return None

    found = lex(0, 0, size, [])
    assert found is not None
    return target, found


def cc_exact(inst: Instance, node_limit: int | None = DEFAULT_NODE_LIMIT) -> RuleOutput:
    masks = {c: inst.masks[c] for c in inst.candidates}
    _, picks = max_coverage(masks, inst.k, node_limit=node_limit)
    trace = [SelectionEvent(c, Fraction(inst.approval_score(c)), inst.approvers[c]) for c in picks]
    return _output(inst, "cc", trace)


def greedy_coverage(inst: Instance, start: Iterable[int], count: int, covered: int | None = None) -> list[SelectionEvent]:
    """``count`` greedy steps maximising coverage; ties go to the lowest index."""
    chosen = set(start)
    cov = covered_mask(inst, chosen) if covered is None else covered
    events = []
    for _ in range(count):
        best, best_gain = None, -1
        for c in inst.candidates:
            if c in chosen:
                continue
            gain = (inst.masks[c] & ~cov).bit_count()
            if gain > best_gain:
                best, best_gain = c, gain
        if best is None:
            break
        chosen.add(best)
        cov |= inst.masks[best]
        events.append(SelectionEvent(best, Fraction(best_gain), inst.approvers[best]))
    return events


def seq_cc(inst: Instance) -> RuleOutput:
    return _output(inst, "seq-cc", greedy_coverage(inst, (), inst.k))


# -- Method of Equal Shares --------------------------------------------------


def equal_share_price(budgets: Iterable[Fraction], cost: Fraction = Fraction(1)) -> Fraction | None:
    """Smallest rho with sum(min(b, rho)) == cost, or ``None`` if the budgets fall short."""
    bs = sorted(budgets)
    if sum(bs, Fraction(0)) < cost:
        return None
    paid = Fraction(0)
    for idx, b in enumerate(bs):
        rho = (cost - paid) / (len(bs) - idx)
        if rho <= b:
            return rho
        paid += b
    return None  # unreachable when the total suffices


def mes(
    inst: Instance,
    budget_per_voter: Fraction | None = None,
    max_committee: int | None = None,
) -> RuleOutput:
    """Method of Equal Shares with unit candidate cost.

    ``max_committee=None`` defaults to ``k``; pass ``inst.m`` for an uncapped run.
    """
    if budget_per_voter is None:
        budget_per_voter = Fraction(inst.k, inst.n)
    budget_per_voter = Fraction(budget_per_voter)
    if budget_per_voter <= 0:
        raise ValueError("budget_per_voter must be positive")
    cap = inst.k if max_committee is None else max_committee
    budget = [budget_per_voter] * inst.n
    selected: set[int] = set()
    pay: dict[tuple[int, int], Fraction] = {}
    trace: list[SelectionEvent] = []
    while len(trace) < cap:
        best, best_rho = None, None
        for c in inst.candidates:
            if c in selected or not inst.approvers[c]:
                continue
            rho = equal_share_price(budget[i] for i in inst.approvers[c])
            if rho is not None and (best_rho is None or rho < best_rho):
                best, best_rho = c, rho
        if best is None:
            break
        selected.add(best)
        for i in inst.approvers[best]:
            p = min(budget[i], best_rho)
            if p:
                pay[(i, best)] = p
                budget[i] -= p
        trace.append(SelectionEvent(best, best_rho, inst.approvers[best]))
    ps = PaymentSystem(pay, budget_per_voter)
    return _output(inst, "mes", trace, ps, final_budgets=tuple(budget))


# -- Greedy Justified Candidate Rule ----------------------------------------


def _largest_deserving_group(inst: Instance, c: int, util: Sequence[int]) -> tuple[int, int, frozenset[int]] | None:
    """Best ``(|N'|, ell, N')`` for candidate ``c``: N' = approvers with utility < ell, ell-large."""
    best = None
    for ell in range(1, inst.k + 1):
        group = [i for i in inst.approvers[c] if util[i] < ell]
        if inst.is_large(len(group), ell) and (best is None or len(group) > best[0]):
            best = (len(group), ell, frozenset(group))
    return best


def gjcr(inst: Instance) -> RuleOutput:
    util = [0] * inst.n
    budget = [Fraction(inst.k, inst.n)] * inst.n
    selected: set[int] = set()
    pay: dict[tuple[int, int], Fraction] = {}
    trace: list[SelectionEvent] = []
    levels: list[int] = []
    witness_ok = True
    while len(selected) < inst.k:
        best = None
        for c in inst.candidates:
            if c in selected:
                continue
            cand = _largest_deserving_group(inst, c, util)
            if cand is not None and (best is None or cand[0] > best[1][0]):
                best = (c, cand)
        if best is None:
            break
        c, (size, ell, group) = best
        selected.add(c)
        for i in inst.approvers[c]:
            util[i] += 1
        # the deserving group funds c by equal shares out of its remaining budget
        rho = equal_share_price(budget[i] for i in group)
        if rho is None:
            witness_ok = False
        else:
            for i in sorted(group):
                p = min(budget[i], rho)
                if p:
                    pay[(i, c)] = p
                    budget[i] -= p
        trace.append(SelectionEvent(c, Fraction(size), group))
        levels.append(ell)
    payments = PaymentSystem(pay, Fraction(inst.k, inst.n)) if witness_ok else None
    out = _output(inst, "gjcr", trace, payments, levels=tuple(levels))
    if payments is None:
        from .payments import is_affordable

        ok, ps = is_affordable(inst, out.committee)
        assert ok, "GJCR output must be affordable"
        out = RuleOutput(out.committee, ps, out.trace, out.exhaustive, out.extra)
    return out


# -- GreedyEJR ---------------------------------------------------------------


def _best_cohesive_set(
    inst: Instance,
    pool: Sequence[int],
    alive: int,
    ell: int,
    tick,
) -> tuple[int, tuple[int, ...]] | None:
    """Lexicographically first ``ell``-subset of ``pool`` maximising common approvers in ``alive``.

    Only subsets whose common-approver group is ``ell``-large qualify.
    """
    masks = [inst.masks[c] & alive for c in pool]
    best: list = [None, None]  # size, members

    def dfs(start: int, mask: int, chosen: list[int]) -> None:
        tick()
        size = mask.bit_count()
        if not inst.is_large(size, ell):
            return
        if best[0] is not None and size <= best[0]:
            return
        if len(chosen) == ell:
            best[0], best[1] = size, tuple(chosen)
            return
        for pos in range(start, len(pool) - (ell - len(chosen)) + 1):
            chosen.append(pool[pos])
            dfs(pos + 1, mask & masks[pos], chosen)
            chosen.pop()

    dfs(0, alive, [])
    if best[0] is None:
        return None
    return best[0], best[1]


def greedy_ejr(inst: Instance, node_limit: int | None = DEFAULT_NODE_LIMIT) -> RuleOutput:
    nodes = 0

    def tick() -> None:
        nonlocal nodes
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise ResourceLimitError(f"GreedyEJR subset search exceeded {node_limit} nodes")

    alive = (1 << inst.n) - 1
    selected: list[int] = []
    trace: list[SelectionEvent] = []
    pay: dict[tuple[int, int], Fraction] = {}
    levels: list[int] = []
    while alive:
        pool = [c for c in inst.candidates if c not in selected and inst.masks[c] & alive]
        top = min(inst.k - len(selected), len(pool), alive.bit_count() * inst.k // inst.n)
        found = None
        for ell in range(top, 0, -1):
            found = _best_cohesive_set(inst, pool, alive, ell, tick)
            if found is not None:
                break
        if found is None:
            break
        size, group_cands = found
        common = alive
        for c in group_cands:
            common &= inst.masks[c]
        group = frozenset(i for i in range(inst.n) if common >> i & 1)
        share = Fraction(1, size)
        for c in group_cands:
            selected.append(c)
            trace.append(SelectionEvent(c, Fraction(ell), group))
            levels.append(ell)
            for i in group:
                pay[(i, c)] = share
        alive &= ~common
    ps = PaymentSystem(pay, Fraction(inst.k, inst.n))
    return _output(inst, "greedy-ejr", trace, ps, levels=tuple(levels))


# -- maximin support ---------------------------------------------------------


def mms_extend(inst: Instance, start: Iterable[int], target: int) -> list[SelectionEvent]:
    """Greedily add candidates maximising maximin support until ``target`` members."""
    from .axioms import maximin_support

    chosen = list(start)
    events = []
    while len(chosen) < target:
        best, best_val = None, None
        for c in inst.candidates:
            if c in chosen:
                continue
            val = maximin_support(inst, chosen + [c])
            if best_val is None or val > best_val:
                best, best_val = c, val
        if best is None:
            break
        chosen.append(best)
        events.append(SelectionEvent(best, best_val, inst.approvers[best]))
    return events


def mms_rule(inst: Instance) -> RuleOutput:
    return _output(inst, "mms", mms_extend(inst, (), inst.k))


# -- sequential Phragmen -----------------------------------------------------


def seq_phragmen(inst: Instance) -> RuleOutput:
    """Sequential Phragmen; voters earn money at rate 1, balances reset on purchase.

    The emitted payment system uses per-voter budget equal to the final
    election time, i.e. total budget ``B = n * t_final``.
    """
    reset = [Fraction(0)] * inst.n  # time of each voter's last purchase
    selected: set[int] = set()
    pay: dict[tuple[int, int], Fraction] = {}
    trace: list[SelectionEvent] = []
    now = Fraction(0)
    while len(trace) < inst.k:
        best, best_t = None, None
        for c in inst.candidates:
            if c in selected or not inst.approvers[c]:
                continue
            voters = inst.approvers[c]
            t = (1 + sum((reset[i] for i in voters), Fraction(0))) / len(voters)
            if best_t is None or t < best_t:
                best, best_t = c, t
        if best is None:
            break
        now = best_t
        selected.add(best)
        for i in inst.approvers[best]:
            p = now - reset[i]
            if p:
                pay[(i, best)] = p
            reset[i] = now
        trace.append(SelectionEvent(best, now, inst.approvers[best]))
    ps = PaymentSystem(pay, now) if trace else None
    return _output(inst, "phragmen", trace, ps, total_budget=now * inst.n)


RULES = {
    "av": av,
    "cc": cc_exact,
    "seq-cc": seq_cc,
    "mes": mes,
    "gjcr": gjcr,
    "greedy-ejr": greedy_ejr,
    "mms": mms_rule,
    "phragmen": seq_phragmen,
}

AFFORDABLE_RULES = ("mes", "gjcr", "greedy-ejr")


def committee_from(inst: Instance, members: Iterable[int], tag: str = "given") -> Committee:
    members = tuple(members)
    members_of(inst, members)
    return Committee.of(members, tag)
