"""Payment systems: affordability, priceability and B-priceability.

Constraints on a payment system ``p`` for committee ``W`` (budget ``b`` per voter):

* C1 ``p[i, c] > 0`` only if voter ``i`` approves ``c`` (and no payment is negative)
* C2 every voter spends at most ``b``
* C3 every member of ``W`` collects exactly 1
* C4 no candidate outside ``W`` collects anything
* C5 approvers of any ``c`` outside ``W`` hold at most 1 in unspent budget

Affordable = C1-C4 with ``b = k/n``; priceable adds C5; B-priceable uses ``b = B/n``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Mapping

from .core import CommitteeLike, Instance, fmt_fraction, members_of
from .flow import FlowNetwork
from .lp import find_feasible_point

Mode = Literal["affordable", "priceable", "b_priceable"]


@dataclass(frozen=True)
class PaymentSystem:
    payments: Mapping[tuple[int, int], Fraction]
    budget_per_voter: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "payments", {key: Fraction(v) for key, v in self.payments.items() if v != 0}
        )
        object.__setattr__(self, "budget_per_voter", Fraction(self.budget_per_voter))

    def spent(self, voter: int) -> Fraction:
        return sum((p for (i, _), p in self.payments.items() if i == voter), Fraction(0))

    def collected(self, candidate: int) -> Fraction:
        return sum((p for (_, c), p in self.payments.items() if c == candidate), Fraction(0))

    def total_budget(self, n: int) -> Fraction:
        return self.budget_per_voter * n

    def to_json(self) -> str:
        rows = [[i, c, fmt_fraction(p)] for (i, c), p in sorted(self.payments.items())]
        return json.dumps({"budget": fmt_fraction(self.budget_per_voter), "payments": rows})

    @classmethod
    def from_json(cls, text: str) -> "PaymentSystem":
        data = json.loads(text)
        pay = {(int(i), int(c)): Fraction(p) for i, c, p in data["payments"]}
        return cls(pay, Fraction(data["budget"]))


@dataclass(frozen=True)
class Violation:
    constraint: str  # "C1".."C5"
    voter: int | None = None
    candidate: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class PaymentVerdict:
    ok: bool
    violations: tuple[Violation, ...] = ()
    budget_per_voter: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok

    def constraints(self) -> set[str]:
        return {v.constraint for v in self.violations}


def verify(
    inst: Instance,
    w: CommitteeLike,
    ps: PaymentSystem,
    mode: Mode = "affordable",
    total_budget: Fraction | None = None,
) -> PaymentVerdict:
    """Check ``ps`` against C1-C4 (affordable) or C1-C5 (priceable / b_priceable).

    For ``b_priceable`` the per-voter budget is ``total_budget / n`` if given,
    else ``ps.budget_per_voter``. Never raises on malformed payments.
    """
    members = members_of(inst, w, allow_oversize=True)
    if mode == "b_priceable":
        b = Fraction(total_budget) / inst.n if total_budget is not None else ps.budget_per_voter
    elif mode in ("affordable", "priceable"):
        b = Fraction(inst.k, inst.n)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out: list[Violation] = []
    spent: dict[int, Fraction] = defaultdict(Fraction)
    collected: dict[int, Fraction] = defaultdict(Fraction)
    for (i, c), p in sorted(ps.payments.items()):
        if not (0 <= i < inst.n and 0 <= c < inst.m):
            out.append(Violation("C1", i, c, "payment index out of range"))
            continue
        if p < 0:
            out.append(Violation("C1", i, c, f"negative payment {p}"))
        elif p > 0 and c not in inst.approvals[i]:
            out.append(Violation("C1", i, c, f"pays {p} for an unapproved candidate"))
        spent[i] += p
        collected[c] += p
    if mode == "b_priceable" and b <= 0:
        out.append(Violation("C2", None, None, f"budget must be positive, got {b * inst.n}"))
    for i in range(inst.n):
        if spent[i] > b:
            out.append(Violation("C2", i, None, f"spends {spent[i]} > budget {b}"))
    for c in sorted(members):
        if collected[c] != 1:
            out.append(Violation("C3", None, c, f"collects {collected[c]} != 1"))
    for c in inst.candidates:
        if c not in members and collected[c] != 0:
            out.append(Violation("C4", None, c, f"non-member collects {collected[c]}"))
    if mode != "affordable":
        for c in inst.candidates:
            if c in members:
                continue
            leftover = sum((b - spent[i] for i in inst.approvers[c]), Fraction(0))
            if leftover > 1:
                out.append(Violation("C5", None, c, f"approvers hold {leftover} > 1"))
    return PaymentVerdict(not out, tuple(out), b)


def is_affordable(inst: Instance, w: CommitteeLike) -> tuple[bool, PaymentSystem | None]:
    """Decide C1-C4 feasibility by integral max-flow (all budgets scaled by ``n``).

    source -> member (capacity n), member -> approver (unbounded), voter -> sink (capacity k).
    """
    members = sorted(members_of(inst, w, allow_oversize=True))
    if not members:
        return True, PaymentSystem({}, Fraction(inst.k, inst.n))
    s, t = 0, 1
    member_node = {c: 2 + j for j, c in enumerate(members)}
    voter_base = 2 + len(members)
    net = FlowNetwork(voter_base + inst.n)
    demand = len(members) * inst.n
    for c in members:
        net.add_edge(s, member_node[c], inst.n)
    edges = {}
    for c in members:
        for i in inst.approvers[c]:
            edges[(i, c)] = net.add_edge(member_node[c], voter_base + i, demand)
    for i in range(inst.n):
        net.add_edge(voter_base + i, t, inst.k)
    if net.max_flow(s, t) < demand:
        return False, None
    pay = {key: Fraction(net.flow_on(e), inst.n) for key, e in edges.items() if net.flow_on(e)}
    return True, PaymentSystem(pay, Fraction(inst.k, inst.n))


def _price_lp(
    inst: Instance, members: frozenset[int], budget: Fraction | None
) -> tuple[Fraction, dict[tuple[int, int], Fraction]] | None:
    """Solve C1-C5 as an LP; ``budget=None`` makes the per-voter budget a variable."""
    var: dict[tuple[int, int], int] = {}
    for c in sorted(members):
        for i in sorted(inst.approvers[c]):
            var[(i, c)] = len(var)
    beta = len(var) if budget is None else None
    num_vars = len(var) + (budget is None)
    by_voter: dict[int, list[int]] = defaultdict(list)
    for (i, _), j in var.items():
        by_voter[i].append(j)

    eq = []
    for c in sorted(members):
        row = {var[(i, c)]: Fraction(1) for i in inst.approvers[c]}
        eq.append((row, Fraction(1)))
    ub = []
    for i, cols in by_voter.items():
        row = {j: Fraction(1) for j in cols}
        if budget is None:
            row[beta] = Fraction(-1)
            ub.append((row, Fraction(0)))
        else:
            ub.append((row, budget))
    for c in inst.candidates:
        if c in members or not inst.approvers[c]:
            continue
        # |N_c| * b - sum_{i in N_c} spent_i <= 1
        row: dict[int, Fraction] = defaultdict(Fraction)
        rhs = Fraction(1)
        if budget is None:
            row[beta] += len(inst.approvers[c])
        else:
            rhs -= len(inst.approvers[c]) * budget
        for i in inst.approvers[c]:
            for j in by_voter.get(i, ()):
                row[j] -= 1
        if not row:
            if rhs < 0:
                return None
            continue
        ub.append((dict(row), rhs))
    x = find_feasible_point(num_vars, eq, ub)
    if x is None:
        return None
    pay = {key: x[j] for key, j in var.items() if x[j]}
    b = budget if budget is not None else x[beta]
    return b, pay


def is_priceable(inst: Instance, w: CommitteeLike) -> tuple[bool, PaymentSystem | None]:
    members = members_of(inst, w, allow_oversize=True)
    b = Fraction(inst.k, inst.n)
    res = _price_lp(inst, members, b)
    if res is None:
        return False, None
    return True, PaymentSystem(res[1], b)


def is_b_priceable(
    inst: Instance, w: CommitteeLike, total_budget: Fraction | None = None
) -> tuple[bool, Fraction | None, PaymentSystem | None]:
    """Decide B-priceability; with ``total_budget=None`` the budget B is searched for.

    Returns ``(ok, B, witness)``.
    """
    members = members_of(inst, w, allow_oversize=True)
    n = inst.n
    if total_budget is not None:
        total_budget = Fraction(total_budget)
        if total_budget <= 0:
            raise ValueError("B must be positive")
        res = _price_lp(inst, members, total_budget / n)
        if res is None:
            return False, None, None
        return True, total_budget, PaymentSystem(res[1], total_budget / n)
    if not members:
        # any small enough positive budget satisfies C5
        largest = max((len(a) for a in inst.approvers), default=0)
        b = Fraction(1, largest) if largest else Fraction(1)
        return True, b * n, PaymentSystem({}, b)
    res = _price_lp(inst, members, None)
    if res is None:
        return False, None, None
    b, pay = res
    # C3 forces b > 0 whenever the committee is non-empty
    return True, b * n, PaymentSystem(pay, b)
