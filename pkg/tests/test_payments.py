from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import linprog

from affordable_committees.core import Instance
from affordable_committees.payments import (
    PaymentSystem,
    is_affordable,
    is_b_priceable,
    is_priceable,
    verify,
)
from affordable_committees.rules import av, greedy_ejr, mes
from helpers import instance_and_committee, random_instances

F = Fraction


def _scipy_price(inst, w, priceable):
    """Float LP over payments for the same constraints, as an independent oracle."""
    members = set(w)
    keys = [(i, c) for c in sorted(members) for i in sorted(inst.approvers[c])]
    if not members:
        return not priceable or all(len(inst.approvers[c]) * F(inst.k, inst.n) <= 1 for c in inst.candidates)
    if not keys:
        return False
    idx = {key: j for j, key in enumerate(keys)}
    b = inst.k / inst.n
    a_eq = np.zeros((len(members), len(keys)))
    for r, c in enumerate(sorted(members)):
        for i in inst.approvers[c]:
            a_eq[r, idx[(i, c)]] = 1
    a_ub, b_ub = [], []
    for i in range(inst.n):
        row = np.zeros(len(keys))
        for c in inst.approvals[i] & members:
            row[idx[(i, c)]] = 1
        a_ub.append(row)
        b_ub.append(b)
    if priceable:
        for c in inst.candidates:
            if c in members:
                continue
            row = np.zeros(len(keys))
            for i in inst.approvers[c]:
                for d in inst.approvals[i] & members:
                    row[idx[(i, d)]] -= 1
            a_ub.append(row)
            b_ub.append(1 - len(inst.approvers[c]) * b)
    res = linprog(np.zeros(len(keys)), A_ub=np.array(a_ub), b_ub=b_ub, A_eq=a_eq,
                  b_eq=np.ones(len(members)), bounds=[(0, None)] * len(keys), method="highs")
    return res.status == 0


def test_each_constraint_is_reported():
    inst = Instance.from_lists(3, 2, [[0], [0, 1], [2], [2]])
    b = F(1, 2)
    good = PaymentSystem({(0, 0): b, (1, 0): b}, b)
    assert verify(inst, [0], good, "affordable").ok
    # C5: voters 2 and 3 keep 1/2 each for the unselected candidate 2, a total of exactly 1
    assert verify(inst, [0], good, "priceable").ok
    cases = {
        "C1": PaymentSystem({(0, 0): b, (2, 0): b}, b),
        "C2": PaymentSystem({(0, 0): F(3, 4), (1, 0): F(1, 4), (1, 1): F(1, 2)}, b),
        "C3": PaymentSystem({(0, 0): b}, b),
        "C4": PaymentSystem({(0, 0): b, (1, 0): b, (1, 1): F(1, 4)}, b),
    }
    for name, ps in cases.items():
        assert name in verify(inst, [0], ps, "affordable").constraints()
    # C1 also flags negative payments and out-of-range indices
    assert "C1" in verify(inst, [0], PaymentSystem({(0, 0): F(3, 2), (1, 0): F(-1, 2)}, b)).constraints()
    assert "C1" in verify(inst, [0], PaymentSystem({(0, 0): b, (1, 0): b, (9, 0): F(0) + 1}, b)).constraints()


def test_c5_violation():
    inst = Instance.from_lists(2, 2, [[0], [0], [1]])
    ps = PaymentSystem({}, F(2, 3))
    verdict = verify(inst, [], ps, "priceable")
    # the two approvers of candidate 0 keep 2/3 each
    assert verdict.constraints() == {"C5"} and verdict.violations[0].candidate == 0
    assert verify(inst, [], ps, "b_priceable", total_budget=1).ok
    assert verify(inst, [], ps, "affordable").ok


def test_payment_json_round_trip():
    ps = PaymentSystem({(3, 1): F(1, 3), (0, 2): F(2, 3)}, F(5, 7))
    assert PaymentSystem.from_json(ps.to_json()) == ps
    assert '"budget": "5/7"' in ps.to_json()


def test_fig1_payment_facts(fig1):
    assert is_affordable(fig1, av(fig1).committee) == (False, None)
    ok, ps = is_affordable(fig1, mes(fig1).committee)
    assert ok and verify(fig1, mes(fig1).committee, ps).ok
    assert is_affordable(fig1, [])[0]
    out = greedy_ejr(fig1)
    verdict = verify(fig1, out.committee, out.payments, "priceable")
    assert verdict.constraints() == {"C5"}
    assert {v.candidate for v in verdict.violations} == {6, 7, 8}
    assert not is_priceable(fig1, out.committee)[0]


@given(instance_and_committee(max_n=7, max_m=6))
def test_witnesses_verify_and_priceable_implies_affordable(pair):
    inst, w = pair
    aff, ps = is_affordable(inst, w)
    if aff:
        assert verify(inst, w, ps, "affordable").ok
    pr, ps2 = is_priceable(inst, w)
    if pr:
        assert verify(inst, w, ps2, "priceable").ok
        assert aff


@given(instance_and_committee(max_n=7, max_m=6))
def test_affordability_is_subset_closed(pair):
    inst, w = pair
    if is_affordable(inst, w)[0]:
        for drop in w:
            assert is_affordable(inst, [c for c in w if c != drop])[0]


def test_flow_and_lp_agree_with_float_oracle():
    for t, inst in enumerate(random_instances(120, seed=21, n=(1, 9), m=(1, 6))):
        w = list(range(t % (inst.k + 1)))
        assert is_affordable(inst, w)[0] == _scipy_price(inst, w, priceable=False)
        assert is_priceable(inst, w)[0] == _scipy_price(inst, w, priceable=True)


def test_b_priceable():
    inst = Instance.from_lists(3, 2, [[0], [0, 1], [2], [2]])
    ok, total, ps = is_b_priceable(inst, [0])
    assert ok and verify(inst, [0], ps, "b_priceable", total_budget=total).ok
    assert is_b_priceable(inst, [])[0]
    assert is_b_priceable(inst, [0], total_budget=2)[0]
    # with B = 10 the approvers of candidate 2 keep 5
    assert not is_b_priceable(inst, [0], total_budget=10)[0]
    with pytest.raises(ValueError):
        is_b_priceable(inst, [0], total_budget=0)
    # voter 0 alone funds both members, so b >= 1 and the approvers of candidate 2 keep 3b
    assert not is_b_priceable(Instance.from_lists(3, 2, [[0, 1], [2], [2], [2]]), [0, 1])[0]


def test_b_priceable_search_matches_priceable_when_budget_is_k():
    for inst in random_instances(60, seed=22, n=(1, 8), m=(1, 6)):
        w = mes(inst).committee
        assert is_b_priceable(inst, w)[0]
        assert is_b_priceable(inst, w, total_budget=inst.k)[0] == is_priceable(inst, w)[0]
