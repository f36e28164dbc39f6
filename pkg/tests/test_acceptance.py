"""Acceptance criteria, one test per criterion; each prints a single pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the lines inline);
the lines are also collected in the "acceptance criteria" section of the terminal summary.
"""

import random
import time
from collections import Counter
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from affordable_committees.axioms import (
    check_ejr,
    check_ejr_plus,
    check_ejr_plus_brute,
    check_jr,
    maximin_support,
    representativeness_brute,
    representativeness_profile,
)
from affordable_committees.completions import complete_av, complete_cc, mes_perturbation, mes_vary_budget
from affordable_committees.core import coverage, fmt_fraction, optimal_coverage, optimal_welfare, social_welfare
from affordable_committees.generators import (
    brute_force_opt,
    gen_bpriceable_lb,
    gen_ejr_hard,
    gen_fig1,
    gen_perturbation_tight,
    gen_vary_budget_clones,
)
from affordable_committees.harness import BOUNDS, Pipeline, evaluate, load_config, run_sweep
from affordable_committees.payments import is_affordable, verify
from affordable_committees.rules import av, cc_exact, gjcr, greedy_ejr, mes, seq_phragmen
from helpers import random_instances

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def expect(failures, name, got, want):
    if got != want:
        failures.append(f"{name}: expected {want}, got {got}")


def best_completion_welfare(inst, base):
    rest = [c for c in inst.candidates if c not in base]
    return max(social_welfare(inst, list(base) + list(extra)) for extra in combinations(rest, inst.k - len(base)))


def test_criterion_1_example_fixtures(acceptance):
    start = time.perf_counter()
    failures: list[str] = []
    inst = gen_fig1()

    w_av = av(inst).committee
    expect(failures, "AV sw", social_welfare(inst, w_av), 96)
    expect(failures, "optimal coverage", optimal_coverage(inst), 24)

    out = mes(inst)
    w = out.committee
    expect(failures, "MES size", len(w), 9)
    expect(failures, "MES sw", social_welfare(inst, w), 65)
    expect(failures, "MES cov", coverage(inst, w), 20)
    expect(failures, "MES first four rho", [ev.value for ev in out.trace[:4]], [Fraction(1, 8)] * 4)
    w_cc = complete_cc(inst, w)
    expect(failures, "MES+CC cov", coverage(inst, w_cc), 23)
    expect(failures, "MES+CC sw", social_welfare(inst, w_cc), 68)
    expect(failures, "MES+AV sw", social_welfare(inst, complete_av(inst, w)), 89)
    expect(failures, "MES+AV sw (brute-force oracle)", best_completion_welfare(inst, w), 89)

    g = gjcr(inst).committee
    expect(failures, "GJCR+AV sw", social_welfare(inst, complete_av(inst, g)), 91)
    expect(failures, "GJCR+CC cov", coverage(inst, complete_cc(inst, g)), 24)

    e = greedy_ejr(inst).committee
    expect(failures, "GreedyEJR satisfies EJR", check_ejr(inst, e).holds, True)
    plus = check_ejr_plus(inst, e)
    expect(failures, "GreedyEJR EJR+ witnesses", [(v.candidates, v.level) for v in plus.violations], [((8,), 3)])

    jr = check_jr(inst, w_av)
    witness = ((8,), frozenset(range(4, 10)))
    expect(failures, "AV JR witness c9 with voters 5..10", witness in {(v.candidates, v.group) for v in jr.violations}, True)

    elapsed = time.perf_counter() - start
    if elapsed >= 1:
        failures.append(f"runtime {elapsed:.2f}s >= 1s")
    acceptance(1, "worked-example fixtures", failures, f"{elapsed:.2f}s")


REQUIRED_BOUNDS = {
    "afford-cov": ["mes+cc", "gjcr+cc", "greedy-ejr+cc"],
    "cor-3/4": ["mes+cc", "gjcr+cc", "greedy-ejr+cc"],
    "thm-seqcc": ["mes+seq-cc", "gjcr+seq-cc", "greedy-ejr+seq-cc"],
    "thm-gjcr-av": ["gjcr+av"],
    "thm-mes-av": ["mes+av"],
    "cor-ejr+-av": ["mes+av"],
    "thm-hybrid-c": ["hybrid-c", "hybrid-c@5/2", "hybrid-c@4"],
    "thm-hybrid-sqrt": ["hybrid-sqrt"],
    "thm-vary-budget": ["mes-vary"],
    "thm-perturbation": ["mes-perturb"],
}
REQUIRED_MMS = {"thm-mms-half": ["mes+mms", "gjcr+mms", "greedy-ejr+mms"]}
MIN_INSTANCES = 500


def _sweep_failures(config, required, max_m):
    failures: list[str] = []
    cfg = load_config(str(CONFIGS / config))
    result = run_sweep(cfg)
    evaluated: Counter = Counter()
    for row in result.rows:
        if not (row["n"] <= 40 and row["m"] <= max_m and row["k"] <= 10):
            failures.append(f"instance out of range in trial {row['trial']}")
        for b in cfg.bounds:
            verdict = row[f"bound:{b}"]
            if verdict == "fail":
                failures.append(f"{b} violated by {row['pipeline']} in trial {row['trial']}")
            elif verdict == "pass":
                evaluated[(b, row["pipeline"])] += 1
    for bound, pipes in required.items():
        for p in pipes:
            if evaluated[(bound, p)] < MIN_INSTANCES:
                failures.append(f"{bound} on {p}: only {evaluated[(bound, p)]} instances evaluated")
    return failures, sum(evaluated.values())


def test_criterion_2_theorem_sweeps(acceptance):
    failures, checks = _sweep_failures("theorem_sweep.json", REQUIRED_BOUNDS, 16)
    mms_failures, mms_checks = _sweep_failures("mms_sweep.json", REQUIRED_MMS, 12)
    acceptance(2, "theorem sweeps", failures + mms_failures, f"{checks + mms_checks} exact bound checks, 0 violations")


def test_criterion_3_oracle_equivalence(acceptance):
    failures: list[str] = []
    rng = random.Random(303)
    insts = random_instances(220, seed=301, n=(1, 10), m=(1, 10))
    for t, inst in enumerate(insts):
        best, brute_w = brute_force_opt(inst, "coverage")
        exact = cc_exact(inst)
        if coverage(inst, exact.committee) != best or sorted(exact.members) != list(brute_w.members):
            failures.append(f"cc_exact mismatch on instance {t}")
        size = rng.randint(0, inst.k)
        committees = [mes(inst).committee.members, av(inst).committee.members, rng.sample(range(inst.m), size)]
        for w in committees:
            if w and maximin_support(inst, w) != maximin_support(inst, w, method="brute"):
                failures.append(f"support mismatch on instance {t}")
            if check_ejr_plus(inst, w).holds != check_ejr_plus_brute(inst, w):
                failures.append(f"EJR+ mismatch on instance {t}")
            if representativeness_profile(inst, w) != representativeness_brute(inst, w):
                failures.append(f"representativeness mismatch on instance {t}")
    acceptance(3, "oracle equivalence", failures, f"{len(insts)} instances, m <= 10")


def test_criterion_4_payments(acceptance):
    failures: list[str] = []
    fig1 = gen_fig1()
    expect(failures, "is_affordable(AV committee of fig1)", is_affordable(fig1, av(fig1).committee)[0], False)

    phragmen_checked = 0
    for t, inst in enumerate(random_instances(320, seed=401, n=(1, 40), m=(1, 12), k_max=10)):
        m_out = mes(inst)
        if not verify(inst, m_out.committee, m_out.payments, "priceable").ok:
            failures.append(f"MES witness not priceable on instance {t}")
        for rule in (gjcr, greedy_ejr):
            out = rule(inst)
            if not verify(inst, out.committee, out.payments, "affordable").ok:
                failures.append(f"{rule.__name__} witness not affordable on instance {t}")
        ph = seq_phragmen(inst)
        if not ph.exhaustive:
            continue
        total = ph.extra["total_budget"]
        if total < inst.k:
            failures.append(f"phragmen budget below k on instance {t}")
        if not verify(inst, ph.committee, ph.payments, "b_priceable", total_budget=total).ok:
            failures.append(f"phragmen witness not B-priceable on instance {t}")
        if 2 * coverage(inst, ph.committee) < optimal_coverage(inst):
            failures.append(f"phragmen representation below 1/2 on instance {t}")
        phragmen_checked += 1
    if phragmen_checked < 200:
        failures.append(f"only {phragmen_checked} exhaustive phragmen instances")

    k = 2
    ratios = []
    for n in (10, 50, 202):
        inst = gen_bpriceable_lb(n, k)
        got = Fraction(coverage(inst, seq_phragmen(inst).committee), optimal_coverage(inst))
        half = Fraction(n, 2)
        want = (half + 1) / (half + 1 + (k - 1) * (half - 1) / k)
        expect(failures, f"bpriceable_lb n={n} ratio", got, want)
        ratios.append(got)
    limit = Fraction(k, 2 * k - 1)
    if not (ratios == sorted(ratios, reverse=True) and all(r > limit for r in ratios)):
        failures.append(f"ratios {ratios} do not decrease towards {limit}")
    acceptance(4, "payment suite", failures,
               f"{phragmen_checked} exhaustive phragmen runs; lb ratios {', '.join(map(fmt_fraction, ratios))}")


def test_criterion_5_tightness_exhibits(acceptance):
    failures: list[str] = []
    inst = gen_ejr_hard(4, Fraction(1, 2))
    logged = []
    for name in ("mes", "gjcr", "greedy-ejr", "mes+av", "gjcr+av", "greedy-ejr+av", "mes+cc", "gjcr+cc"):
        _, rep = evaluate(inst, Pipeline.parse(name))
        logged.append(f"{name} util {fmt_fraction(rep.utilitarian_ratio)} rep {fmt_fraction(rep.representation_ratio)}")
    second_half = list(range(inst.k, 2 * inst.k))
    logged.append(
        f"last-k committee util {fmt_fraction(Fraction(social_welfare(inst, second_half), optimal_welfare(inst)))} "
        f"EJR {'holds' if check_ejr(inst, second_half).holds else 'fails'}"
    )
    print("gen_ejr_hard(4, 1/2): " + "; ".join(logged))

    for k in range(2, 7):
        inst = gen_vary_budget_clones(k)
        n = inst.n
        w = mes_vary_budget(inst)
        expect(failures, f"clones k={k} cov", coverage(inst, w), Fraction(n, k + 1))
        expect(failures, f"clones k={k} optimal cov", optimal_coverage(inst), Fraction(k * n, k + 1))

    for n, k in ((12, 3), (20, 2), (40, 4), (60, 3), (100, 5)):
        inst = gen_perturbation_tight(n, k)
        shared = Fraction(n, 2 * k)
        # lowest-index tie-breaking fills the remaining seats with private candidates
        w = mes_perturbation(inst, tie_break="index")
        expect(failures, f"perturbation n={n} k={k} sw", social_welfare(inst, w), shared + k - 1)
        expect(failures, f"perturbation n={n} k={k} optimal sw", optimal_welfare(inst), Fraction(n, 2))
        # the approval tie-break wins the final tie for a shared candidate, still O(1/k)
        w = mes_perturbation(inst)
        expect(failures, f"perturbation n={n} k={k} sw (approval ties)", social_welfare(inst, w), 2 * shared + k - 2)
    acceptance(5, "tightness exhibits", failures, "ejr_hard ratios logged: " + logged[-1])


def test_criterion_6_asymptotic_claims_not_reproduced(acceptance):
    # asymptotic statements are out of scope; their finite-k exact forms are registered bounds
    failures = [f"missing finite-k bound {b}" for b in list(REQUIRED_BOUNDS) + list(REQUIRED_MMS) if b not in BOUNDS]
    acceptance(6, "asymptotic claims", failures, "not reproduced by design; finite-k exact bounds cover them")
