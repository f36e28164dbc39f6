"""Completion methods that extend a (possibly partial) committee towards size ``k``."""

from __future__ import annotations

import math
from fractions import Fraction

from .core import Committee, CommitteeLike, Instance, covered_mask, members_of
from .rules import (
    DEFAULT_NODE_LIMIT,
    equal_share_price,
    gjcr,
    greedy_coverage,
    max_coverage,
    mes,
    mms_extend,
    top_by_approval,
)


def _as_committee(w: CommitteeLike) -> Committee:
    return w if isinstance(w, Committee) else Committee.of(w)


def complete_av(inst: Instance, w: CommitteeLike, tag: str = "completion:av", size: int | None = None) -> Committee:
    """Fill up to ``size`` (default ``k``) with the highest-approval unselected candidates."""
    w = _as_committee(w)
    members_of(inst, w)
    target = inst.k if size is None else min(size, inst.k)
    return w.extend(top_by_approval(inst, w.members, max(0, target - len(w))), tag)


def complete_cc(inst: Instance, w: CommitteeLike, node_limit: int | None = DEFAULT_NODE_LIMIT) -> Committee:
    """Add ``k - |W|`` candidates maximising coverage of voters that ``W`` leaves unrepresented."""
    w = _as_committee(w)
    members = members_of(inst, w)
    free = inst.k - len(members)
    if free == 0:
        return w
    covered = covered_mask(inst, members)
    masks = {c: inst.masks[c] for c in inst.candidates if c not in members}
    _, picks = max_coverage(masks, free, covered=covered, node_limit=node_limit)
    return w.extend(picks, "completion:cc")


def complete_seq_cc(inst: Instance, w: CommitteeLike) -> Committee:
    w = _as_committee(w)
    members = members_of(inst, w)
    events = greedy_coverage(inst, members, inst.k - len(members))
    return w.extend([ev.candidate for ev in events], "completion:seq-cc")


def complete_mms(inst: Instance, w: CommitteeLike) -> Committee:
    w = _as_committee(w)
    members_of(inst, w)
    events = mms_extend(inst, w.members, inst.k)
    return w.extend([ev.candidate for ev in events], "completion:mms")


def mes_vary_budget(inst: Instance) -> Committee:
    """Raise the virtual committee size k' from k until MES picks at least k candidates.

    Exactly k: returned as is. More than k: the run for k'-1 is AV-completed.
    Not a completion in the strict sense, the result need not contain plain MES.
    """
    approved = {c for c in inst.candidates if inst.approvers[c]}
    previous = None
    for k_virtual in range(inst.k, inst.n * inst.k + 1):
        out = mes(inst, Fraction(k_virtual, inst.n), max_committee=inst.m)
        size = len(out.committee)
        if size == inst.k:
            return out.committee
        if size > inst.k:
            return complete_av(inst, previous.committee)
        if set(out.committee.members) >= approved:
            return complete_av(inst, out.committee)
        previous = out
    return complete_av(inst, previous.committee)


def mes_perturbation(inst: Instance, tie_break: str = "approval") -> Committee:
    """MES, then repeatedly buy the candidate needing the smallest contribution ``rho``
    from non-approvers, approvers spending everything they have left.

    Equal ``rho`` values are common (for k = 1 every first-step price is 1/n).
    ``tie_break="approval"`` prefers more approvers, then the lower index;
    ``"index"`` uses the lower index only and can pick an unapproved candidate.
    """
    if tie_break not in ("approval", "index"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    base = mes(inst)
    committee = base.committee
    budget = list(base.extra["final_budgets"])
    selected = set(committee.members)
    while len(selected) < inst.k:
        best, best_rho, best_key = None, None, None
        for c in inst.candidates:
            if c in selected:
                continue
            # after MES stops, no approver set can fund its candidate alone
            own = sum((budget[i] for i in inst.approvers[c]), Fraction(0))
            others = [budget[i] for i in range(inst.n) if i not in inst.approvers[c]]
            rho = equal_share_price(others, 1 - own)
            if rho is None:
                continue
            key = (rho, -len(inst.approvers[c])) if tie_break == "approval" else (rho,)
            if best is None or key < best_key:
                best, best_rho, best_key = c, rho, key
        if best is None:
            break
        for i in range(inst.n):
            if i in inst.approvers[best]:
                budget[i] = Fraction(0)
            else:
                budget[i] -= min(budget[i], best_rho)
        selected.add(best)
        committee = committee.extend([best], "completion:perturbation")
    return committee


def hybrid_c(inst: Instance, c: Fraction = Fraction(3)) -> Committee:
    """GJCR, then CC completion, padding with top-approval candidates when GJCR is small."""
    c = Fraction(c)
    if c <= 2:
        raise ValueError("c must exceed 2")
    w = gjcr(inst).committee
    if len(w) * c >= inst.k:
        return complete_cc(inst, w)
    pad = math.floor((c - 2) ** 2 * inst.k / (4 * c * c))
    padded = complete_av(inst, w, tag="hybrid:pad", size=len(w) + pad)
    return complete_cc(inst, padded)


def hybrid_sqrt(inst: Instance) -> Committee:
    """GJCR; AV completion if it has at least 3k/4 members, else pad with the
    floor(2*sqrt(k)) top-approval candidates and complete with CC."""
    w = gjcr(inst).committee
    if 4 * len(w) >= 3 * inst.k:
        return complete_av(inst, w)
    pad = math.isqrt(4 * inst.k)
    padded = complete_av(inst, w, tag="hybrid:pad", size=len(w) + pad)
    return complete_cc(inst, padded)


COMPLETIONS = {
    "av": complete_av,
    "cc": complete_cc,
    "seq-cc": complete_seq_cc,
    "mms": complete_mms,
}

STANDALONE = {
    "mes-vary": mes_vary_budget,
    "mes-perturb": mes_perturbation,
    "hybrid-c": hybrid_c,
    "hybrid-sqrt": hybrid_sqrt,
}
