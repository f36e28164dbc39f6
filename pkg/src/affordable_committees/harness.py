"""Guarantee-verification harness: pipelines, named exact bounds, sweeps and shrinking."""

from __future__ import annotations

import csv
import io
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

from . import generators as gen
from .axioms import check_ejr, check_ejr_plus, check_jr, maximin_support, representativeness_profile
from .completions import COMPLETIONS, STANDALONE, hybrid_c
from .core import (
    Committee,
    GuaranteeReport,
    Instance,
    ParameterError,
    ResourceLimitError,
    UndefinedRatioError,
    coverage,
    dumps_instance,
    fmt_fraction,
    geq_sqrt_expr,
    max_unselected_approvals,
    optimal_welfare,
    social_welfare,
)
from .payments import is_affordable, is_priceable, verify
from .rules import AFFORDABLE_RULES, RULES, RuleOutput, cc_exact

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MMS_BRUTE_MAX_M = 12


# -- pipelines ---------------------------------------------------------------


@dataclass(frozen=True)
class Pipeline:
    """``rule``, ``rule+completion`` or a standalone method (``hybrid-c@5/2`` sets c)."""

    name: str
    rule: str
    completion: str | None = None
    param: Fraction | None = None

    @classmethod
    def parse(cls, text: str) -> "Pipeline":
        body, _, param = text.partition("@")
        rule, _, completion = body.partition("+")
        if rule in STANDALONE:
            if completion:
                raise ParameterError(f"{rule} cannot be combined with a completion")
            if param and rule != "hybrid-c":
                raise ParameterError(f"{rule} takes no parameter")
            value = Fraction(param) if param else (Fraction(3) if rule == "hybrid-c" else None)
            if rule == "hybrid-c" and value <= 2:
                raise ParameterError("hybrid-c needs c > 2")
            return cls(text, rule, None, value)
        if rule not in RULES:
            raise ParameterError(f"unknown rule {rule!r}")
        if completion and completion not in COMPLETIONS:
            raise ParameterError(f"unknown completion {completion!r}")
        if param:
            raise ParameterError(f"{rule} takes no parameter")
        return cls(text, rule, completion or None)

    @property
    def base_affordable(self) -> bool:
        return self.rule in AFFORDABLE_RULES


@dataclass
class PipelineResult:
    base: RuleOutput | None
    committee: Committee


def run_pipeline(inst: Instance, pipe: Pipeline, node_limit: int | None = None) -> PipelineResult:
    if pipe.rule in STANDALONE:
        if pipe.rule == "hybrid-c":
            return PipelineResult(None, hybrid_c(inst, pipe.param))
        return PipelineResult(None, STANDALONE[pipe.rule](inst))
    if pipe.rule in ("cc", "greedy-ejr") and node_limit is not None:
        base = RULES[pipe.rule](inst, node_limit=node_limit)
    else:
        base = RULES[pipe.rule](inst)
    w = base.committee
    if pipe.completion == "cc" and node_limit is not None:
        w = COMPLETIONS["cc"](inst, w, node_limit=node_limit)
    elif pipe.completion:
        w = COMPLETIONS[pipe.completion](inst, w)
    return PipelineResult(base, w)


# -- bounds ------------------------------------------------------------------


@dataclass
class Context:
    inst: Instance
    pipe: Pipeline
    result: PipelineResult
    sw: int
    cov: int
    sw_opt: int
    cov_opt: int
    _cache: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.inst.k

    @property
    def util(self) -> Fraction:
        if self.sw_opt == 0:
            raise UndefinedRatioError("optimal welfare is zero")
        return Fraction(self.sw, self.sw_opt)

    @property
    def rep(self) -> Fraction:
        if self.cov_opt == 0:
            raise UndefinedRatioError("optimal coverage is zero")
        return Fraction(self.cov, self.cov_opt)

    @property
    def base(self) -> Committee:
        return self.result.base.committee


def _sqrt_bound(value: Fraction, const: Fraction, coef: Fraction, radicand: Fraction) -> bool:
    return geq_sqrt_expr(value, const, coef, radicand)


def _afford_cov(ctx: Context) -> bool:
    return coverage(ctx.inst, ctx.base) * ctx.k >= len(ctx.base) * ctx.inst.n


def _afford_exhaustive(ctx: Context) -> bool | None:
    w = ctx.base
    if len(w) != ctx.k:
        return None
    sw = social_welfare(ctx.inst, w)
    return coverage(ctx.inst, w) == ctx.inst.n and sw * ctx.k >= ctx.sw_opt


def _cor34(ctx: Context) -> bool:
    return ctx.rep >= Fraction(3, 4)


def seqcc_bound(k: int, base_size: int) -> Fraction:
    """1 - (1 - |W|/k) * (1 - 1/k)^(k - |W|)."""
    return 1 - (1 - Fraction(base_size, k)) * (1 - Fraction(1, k)) ** (k - base_size)


def _seqcc(ctx: Context) -> bool:
    return ctx.rep >= seqcc_bound(ctx.k, len(ctx.base))


def _gjcr_av(ctx: Context) -> bool:
    # util >= 2/sqrt(k) - 1/k
    return _sqrt_bound(ctx.util, Fraction(-1, ctx.k), Fraction(2), Fraction(ctx.k))


def _mes_av(ctx: Context) -> bool:
    return _sqrt_bound(ctx.util, Fraction(-2, ctx.k), Fraction(2), Fraction(ctx.k))


def _ejrplus_av(ctx: Context) -> bool:
    # util >= 1/(4 sqrt k) - 1/(2k)
    return _sqrt_bound(ctx.util, Fraction(-1, 2 * ctx.k), Fraction(1, 4), Fraction(ctx.k))


def hybrid_c_util_ok(util: Fraction, k: int, c: Fraction) -> bool:
    """util >= min(2/sqrt(ck) - 2/k, (c-2)^2/(4c^2) - 1/k)."""
    first = _sqrt_bound(util, Fraction(-2, k), Fraction(2), c * k)
    second = util >= (c - 2) ** 2 / (4 * c * c) - Fraction(1, k)
    return first or second


def _hybrid_c(ctx: Context) -> bool:
    return ctx.rep >= Fraction(3, 4) and hybrid_c_util_ok(ctx.util, ctx.k, ctx.pipe.param)


def _hybrid_sqrt(ctx: Context) -> bool:
    rep_ok = _sqrt_bound(ctx.rep, Fraction(3, 4), Fraction(-2), Fraction(ctx.k))
    return rep_ok and _gjcr_av(ctx)


def _mms_half(ctx: Context) -> bool | None:
    if ctx.inst.m > MMS_BRUTE_MAX_M or len(ctx.result.committee) == 0:
        return None
    best, _ = gen.brute_force_opt(ctx.inst, "supp")
    return 2 * maximin_support(ctx.inst, ctx.result.committee) >= best


def _vary(ctx: Context) -> bool:
    util_ok = _sqrt_bound(ctx.util, Fraction(-2, ctx.k), Fraction(2), Fraction(ctx.k))
    return util_ok and ctx.rep >= Fraction(1, ctx.k)


def _perturb(ctx: Context) -> bool:
    return len(ctx.result.committee) == ctx.k and ctx.rep >= Fraction(1, 2)


def _phragmen(ctx: Context) -> bool | None:
    out = ctx.result.base
    if not out.exhaustive:
        return None
    if not verify(ctx.inst, out.committee, out.payments, "b_priceable").ok:
        return False
    assert out.payments.total_budget(ctx.inst.n) >= ctx.k
    return ctx.rep >= Fraction(1, 2)


def _lemma_rep(ctx: Context) -> bool | None:
    """uA(W) >= t n/k (t integer) and W f-representative => util(W) >= min(1/2, f(t)/(2k))."""
    inst, w = ctx.inst, ctx.base
    if len(w) == inst.m:
        return None
    t = max_unselected_approvals(inst, w) * inst.k // inst.n
    if t < 1:
        return None
    f_t = representativeness_profile(inst, w)[min(t, inst.k) - 1]
    util = Fraction(social_welfare(inst, w), ctx.sw_opt)
    return util >= min(Fraction(1, 2), f_t / (2 * inst.k))


def _lemma_afford(ctx: Context) -> bool | None:
    """Affordable W with uA(W) <= t n/k => util(W) >= min(1/2, |W|/(2tk))."""
    inst, w = ctx.inst, ctx.base
    if len(w) == inst.m:
        return None
    ua = max_unselected_approvals(inst, w)
    t = -(-ua * inst.k // inst.n)
    if t < 1:
        return None
    util = Fraction(social_welfare(inst, w), ctx.sw_opt)
    return util >= min(Fraction(1, 2), Fraction(len(w), 2 * t * inst.k))


@dataclass(frozen=True)
class Bound:
    name: str
    description: str
    applies: Callable[[Pipeline], bool]
    check: Callable[[Context], bool | None]


def _base_in(rules: Iterable[str], completion: str | None | object = ...) -> Callable[[Pipeline], bool]:
    rules = tuple(rules)

    def applies(p: Pipeline) -> bool:
        if p.rule not in rules:
            return False
        return completion is ... or p.completion == completion

    return applies


BOUNDS: dict[str, Bound] = {
    b.name: b
    for b in [
        Bound("afford-cov", "affordable W covers >= |W| n / k voters", _base_in(AFFORDABLE_RULES), _afford_cov),
        Bound("afford-exhaustive", "exhaustive affordable W covers all voters, util >= 1/k", _base_in(AFFORDABLE_RULES), _afford_exhaustive),
        Bound("lemma-ua-rep", "util(W) >= min(1/2, f(t)/2k) for uA(W) >= t n/k", _base_in(("mes", "gjcr", "greedy-ejr")), _lemma_rep),
        Bound("lemma-ua-afford", "util(W) >= min(1/2, |W|/2tk) for uA(W) <= t n/k", _base_in(AFFORDABLE_RULES), _lemma_afford),
        Bound("cor-3/4", "affordable + CC: rep >= 3/4", _base_in(AFFORDABLE_RULES, "cc"), _cor34),
        Bound("thm-seqcc", "affordable + seq-CC: rep >= 1-(1-|W|/k)(1-1/k)^(k-|W|)", _base_in(AFFORDABLE_RULES, "seq-cc"), _seqcc),
        Bound("thm-gjcr-av", "GJCR + AV: util >= 2/sqrt(k) - 1/k", _base_in(("gjcr",), "av"), _gjcr_av),
        Bound("thm-mes-av", "MES + AV: util >= 2/sqrt(k) - 2/k", _base_in(("mes",), "av"), _mes_av),
        Bound("cor-ejr+-av", "affordable EJR+ + AV: util >= 1/(4 sqrt k) - 1/(2k)", _base_in(("mes", "gjcr"), "av"), _ejrplus_av),
        Bound("thm-hybrid-c", "hybrid(c): rep >= 3/4, util >= min(2/sqrt(ck)-2/k, (c-2)^2/4c^2-1/k)", lambda p: p.rule == "hybrid-c", _hybrid_c),
        Bound("thm-hybrid-sqrt", "hybrid(2 sqrt k): rep >= 3/4 - 2/sqrt(k), util >= 2/sqrt(k) - 1/k", lambda p: p.rule == "hybrid-sqrt", _hybrid_sqrt),
        Bound("thm-mms-half", "affordable + MMS: supp >= opt/2", _base_in(AFFORDABLE_RULES, "mms"), _mms_half),
        Bound("thm-vary-budget", "varying budget: util >= 2/sqrt(k) - 2/k, rep >= 1/k", lambda p: p.rule == "mes-vary", _vary),
        Bound("thm-perturbation", "perturbation: exhaustive, rep >= 1/2", lambda p: p.rule == "mes-perturb", _perturb),
        Bound("thm-phragmen-half", "exhaustive B-priceable (seq-Phragmen): rep >= 1/2", _base_in(("phragmen",)), _phragmen),
    ]
}


# -- axioms ------------------------------------------------------------------

AXIOMS: dict[str, Callable[[Instance, Committee], bool]] = {
    "jr": lambda inst, w: check_jr(inst, w, first_only=True).holds,
    "ejr": lambda inst, w: check_ejr(inst, w, first_only=True).holds,
    "ejr+": lambda inst, w: check_ejr_plus(inst, w, first_only=True).holds,
    "affordable": lambda inst, w: is_affordable(inst, w)[0],
    "priceable": lambda inst, w: is_priceable(inst, w)[0],
}


# -- evaluation --------------------------------------------------------------


def evaluate(
    inst: Instance,
    pipe: Pipeline,
    bounds: Sequence[str] = (),
    axioms: Sequence[str] = (),
    cov_opt: int | None = None,
    node_limit: int | None = None,
) -> tuple[Committee, GuaranteeReport]:
    """Run ``pipe`` on ``inst`` and evaluate the requested axioms and bounds.

    ``bound_checks`` only lists bounds that apply to the pipeline and are
    decidable on this instance.
    """
    result = run_pipeline(inst, pipe, node_limit=node_limit)
    w = result.committee
    sw_opt = optimal_welfare(inst)
    if cov_opt is None:
        kwargs = {} if node_limit is None else {"node_limit": node_limit}
        cov_opt = coverage(inst, cc_exact(inst, **kwargs).committee)
    ctx = Context(inst, pipe, result, social_welfare(inst, w), coverage(inst, w), sw_opt, cov_opt)
    checks: dict[str, bool] = {}
    for name in bounds:
        bound = BOUNDS[name]
        if not bound.applies(pipe):
            continue
        try:
            verdict = bound.check(ctx)
        except UndefinedRatioError:
            verdict = None
        if verdict is not None:
            checks[name] = bool(verdict)
    verdicts = {name: AXIOMS[name](inst, w) for name in axioms}
    return w, GuaranteeReport(ctx.sw, ctx.cov, sw_opt, cov_opt, verdicts, checks)


# -- sweep configuration -----------------------------------------------------


@dataclass
class SweepConfig:
    generators: list[dict]
    pipelines: list[str]
    axioms: list[str] = field(default_factory=list)
    bounds: list[str] = field(default_factory=lambda: list(BOUNDS))
    trials: int = 1
    seed: int = 0
    out: str | None = None
    workers: int = 1
    node_limit: int | None = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepConfig":
        known = {"generators", "pipelines", "axioms", "bounds", "trials", "seed", "out", "workers", "node_limit"}
        unknown = set(data) - known - {"schema"}
        if unknown:
            raise ParameterError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**{key: data[key] for key in known if key in data})
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not self.generators:
            raise ParameterError("at least one generator is required")
        if not self.pipelines:
            raise ParameterError("at least one pipeline is required")
        for p in self.pipelines:
            Pipeline.parse(p)
        for b in self.bounds:
            if b not in BOUNDS:
                raise ParameterError(f"unknown bound {b!r}")
        for a in self.axioms:
            if a not in AXIOMS:
                raise ParameterError(f"unknown axiom {a!r}")
        for g in self.generators:
            # draw once so malformed parameters fail before any trial runs
            instance_for(g, random.Random(0))


def _draw(rng: random.Random, spec: Any, lo_cap: int | None = None, hi_cap: int | None = None):
    if isinstance(spec, list):
        lo, hi = spec
        if isinstance(lo, float) or isinstance(hi, float):
            return rng.uniform(lo, hi)
        if hi_cap is not None:
            hi = min(hi, hi_cap)
        return rng.randint(lo, hi)
    return spec


def instance_for(spec: Mapping[str, Any], rng: random.Random) -> Instance:
    kind = spec.get("kind")
    if kind == "random":
        n = _draw(rng, spec.get("n", [2, 20]))
        m = _draw(rng, spec.get("m", [2, 10]))
        k = _draw(rng, spec.get("k", [1, 5]), hi_cap=m)
        p = _draw(rng, spec.get("p", 0.3))
        groups = _draw(rng, spec.get("groups", 2), hi_cap=m)
        noise = _draw(rng, spec.get("noise", 0.0))
        return gen.gen_random(
            n, m, k, spec.get("model", "uniform-p"), rng.randrange(2**32), p=p, groups=groups, noise=noise
        )
    if kind == "fig1":
        return gen.gen_fig1()
    if kind == "ex62":
        return gen.gen_ex62()
    if kind == "mms_ejr":
        return gen.gen_mms_ejr(spec["k"])
    if kind == "ejr_hard":
        return gen.gen_ejr_hard(spec["k"], Fraction(spec["c"]))
    if kind == "bpriceable_lb":
        return gen.gen_bpriceable_lb(spec["n"], spec["k"])
    if kind == "vary_clones":
        return gen.gen_vary_budget_clones(spec["k"], spec.get("group_size", 2))
    if kind == "perturbation_tight":
        return gen.gen_perturbation_tight(spec["n"], spec["k"])
    raise ParameterError(f"unknown generator kind {kind!r}")


def trial_instance(cfg: SweepConfig, trial: int) -> tuple[str, Instance]:
    spec = cfg.generators[trial % len(cfg.generators)]
    rng = random.Random(cfg.seed * 1_000_003 + trial)
    return spec.get("kind", "?"), instance_for(spec, rng)


# -- CSV ---------------------------------------------------------------------


def _decimal(x: Fraction | None) -> str:
    return "" if x is None else f"{float(x):.12g}"


def _exact(x: Fraction | None) -> str:
    return "" if x is None else fmt_fraction(x)


def csv_header(cfg: SweepConfig) -> list[str]:
    return (
        ["schema", "trial", "generator", "n", "m", "k", "pipeline", "committee", "size",
         "sw", "cov", "sw_opt", "cov_opt", "util_ratio", "util_ratio_exact", "rep_ratio", "rep_ratio_exact"]
        + [f"ax:{a}" for a in cfg.axioms]
        + [f"bound:{b}" for b in cfg.bounds]
    )


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def run_trial(cfg: SweepConfig, trial: int) -> list[dict]:
    kind, inst = trial_instance(cfg, trial)
    kwargs = {} if cfg.node_limit is None else {"node_limit": cfg.node_limit}
    cov_opt = coverage(inst, cc_exact(inst, **kwargs).committee)
    rows = []
    for name in cfg.pipelines:
        pipe = Pipeline.parse(name)
        w, rep = evaluate(inst, pipe, cfg.bounds, cfg.axioms, cov_opt=cov_opt, node_limit=cfg.node_limit)
        util, repr_ = _ratio(rep.sw, rep.sw_opt), _ratio(rep.cov, rep.cov_opt)
        row = {
            "schema": SCHEMA_VERSION, "trial": trial, "generator": kind,
            "n": inst.n, "m": inst.m, "k": inst.k, "pipeline": name,
            "committee": " ".join(map(str, w.members)), "size": len(w),
            "sw": rep.sw, "cov": rep.cov, "sw_opt": rep.sw_opt, "cov_opt": rep.cov_opt,
            "util_ratio": _decimal(util), "util_ratio_exact": _exact(util),
            "rep_ratio": _decimal(repr_), "rep_ratio_exact": _exact(repr_),
        }
        for a in cfg.axioms:
            row[f"ax:{a}"] = "pass" if rep.axiom_verdicts[a] else "fail"
        for b in cfg.bounds:
            row[f"bound:{b}"] = "na" if b not in rep.bound_checks else ("pass" if rep.bound_checks[b] else "fail")
        rows.append(row)
    return rows


@dataclass
class SweepResult:
    rows: list[dict]
    failures: list[dict]
    csv_text: str


def _trial_star(args: tuple[SweepConfig, int]) -> list[dict]:
    return run_trial(*args)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    cfg.validate()
    trials = range(cfg.trials)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            batches = list(pool.map(_trial_star, [(cfg, t) for t in trials]))
    else:
        batches = [run_trial(cfg, t) for t in trials]
    rows = [row for batch in batches for row in batch]
    rows.sort(key=lambda r: (r["trial"], cfg.pipelines.index(r["pipeline"])))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=csv_header(cfg), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    failures = [r for r in rows if any(r[f"bound:{b}"] == "fail" for b in cfg.bounds)]
    return SweepResult(rows, failures, buf.getvalue())


# -- shrinking ---------------------------------------------------------------


def _restrict(inst: Instance, voters: Sequence[int], cands: Sequence[int], k: int) -> Instance | None:
    if not voters or not cands or not 1 <= k <= len(cands):
        return None
    index = {c: j for j, c in enumerate(cands)}
    ballots = [[index[c] for c in inst.approvals[i] if c in index] for i in voters]
    return Instance.from_lists(len(cands), k, ballots)


def fails(inst: Instance, pipe: Pipeline, bound: str) -> bool:
    try:
        _, rep = evaluate(inst, pipe, [bound])
    except (UndefinedRatioError, ResourceLimitError):
        return False
    return rep.bound_checks.get(bound) is False


def shrink(inst: Instance, failing: Callable[[Instance], bool]) -> Instance:
    """Greedily drop voters, candidates and committee seats while ``failing`` stays true."""
    voters = list(range(inst.n))
    cands = list(range(inst.m))
    k = inst.k
    current = inst
    changed = True
    while changed:
        changed = False
        for kind in ("voter", "cand", "k"):
            options = voters if kind == "voter" else cands if kind == "cand" else [None]
            for x in list(options):
                v2 = [v for v in voters if v != x] if kind == "voter" else voters
                c2 = [c for c in cands if c != x] if kind == "cand" else cands
                k2 = k - 1 if kind == "k" else min(k, len(c2))
                trial = _restrict(inst, v2, c2, k2)
                if trial is not None and failing(trial):
                    voters, cands, k, current = v2, c2, k2, trial
                    changed = True
    return current


def minimal_counterexample(inst: Instance, pipeline: str, bound: str) -> Instance:
    pipe = Pipeline.parse(pipeline)
    return shrink(inst, lambda i: fails(i, pipe, bound))


def failure_report(cfg: SweepConfig, row: Mapping[str, Any]) -> str:
    _, inst = trial_instance(cfg, row["trial"])
    bad = [b for b in cfg.bounds if row[f"bound:{b}"] == "fail"]
    parts = [f"trial {row['trial']} pipeline {row['pipeline']} failed {', '.join(bad)}", dumps_instance(inst)]
    for b in bad:
        small = minimal_counterexample(inst, row["pipeline"], b)
        parts.append(f"minimal counterexample for {b}:")
        parts.append(dumps_instance(small))
    return "\n".join(parts)


def load_config(path: str) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return SweepConfig.from_dict(data)
