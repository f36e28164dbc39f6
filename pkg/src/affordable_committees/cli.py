"""Command line: ``gen``, ``run``, ``check`` and ``sweep``.

Exit codes: 0 success, 1 failed check or bound, 2 usage or input error, 3 resource limit.
Candidates are 0-based indices on input and output; labels ``c1, c2, ...`` are 1-based.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Sequence

from . import generators as gen
from .axioms import AxiomVerdict, check_ejr, check_ejr_plus, check_jr
from .core import (
    CommitteeError,
    Committee,
    Instance,
    ResourceLimitError,
    dumps_instance,
    fmt_fraction,
    labels,
    load_instance,
    members_of,
    save_instance,
)
from .harness import AXIOMS, Pipeline, evaluate, failure_report, load_config, run_sweep
from .payments import is_affordable, is_b_priceable, is_priceable

EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 1, 2, 3

GENERATORS = ("fig1", "ex62", "random", "mms-ejr", "ejr-hard", "bpriceable-lb", "vary-clones", "perturbation-tight")
CHECKS = ("jr", "ejr", "ejr+", "affordable", "priceable", "b-priceable")


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise CommitteeError(f"{args.kind} needs {' '.join(missing)}")


def cmd_gen(args: argparse.Namespace) -> int:
    kind = args.kind
    if kind == "fig1":
        inst = gen.gen_fig1()
    elif kind == "ex62":
        inst = gen.gen_ex62()
    elif kind == "random":
        _need(args, "n", "m", "k")
        inst = gen.gen_random(
            args.n, args.m, args.k, args.model, args.seed,
            p=args.p, groups=args.groups, noise=args.noise,
        )
    elif kind == "mms-ejr":
        _need(args, "k")
        inst = gen.gen_mms_ejr(args.k)
    elif kind == "ejr-hard":
        _need(args, "k", "c")
        inst = gen.gen_ejr_hard(args.k, Fraction(args.c))
    elif kind == "bpriceable-lb":
        _need(args, "n", "k")
        inst = gen.gen_bpriceable_lb(args.n, args.k)
    elif kind == "vary-clones":
        _need(args, "k")
        inst = gen.gen_vary_budget_clones(args.k, args.group_size)
    else:
        _need(args, "n", "k")
        inst = gen.gen_perturbation_tight(args.n, args.k)
    if args.out:
        save_instance(inst, args.out)
    else:
        sys.stdout.write(dumps_instance(inst))
    return 0


def _ratio_text(num: int, den: int) -> str:
    if den == 0:
        return "undefined"
    r = Fraction(num, den)
    return f"{fmt_fraction(r)} ({float(r):.12g})"


def cmd_run(args: argparse.Namespace) -> int:
    name = args.rule if args.completion is None else f"{args.rule}+{args.completion}"
    pipe = Pipeline.parse(name)
    axioms = [a for a in args.axioms.split(",") if a]
    for a in axioms:
        if a not in AXIOMS:
            raise CommitteeError(f"unknown axiom {a!r}")
    inst = load_instance(args.instance)
    w, rep = evaluate(inst, pipe, axioms=axioms, node_limit=args.node_budget)
    out = [
        f"instance: n={inst.n} m={inst.m} k={inst.k}",
        f"pipeline: {name}",
        f"committee: {' '.join(map(str, w.members))}",
        f"labels: {' '.join(labels(w.members))}",
        f"size: {len(w)}",
        f"sw: {rep.sw} (optimum {rep.sw_opt})",
        f"cov: {rep.cov} (optimum {rep.cov_opt})",
        f"utilitarian ratio: {_ratio_text(rep.sw, rep.sw_opt)}",
        f"representation ratio: {_ratio_text(rep.cov, rep.cov_opt)}",
    ]
    out += [f"axiom {a}: {'pass' if ok else 'fail'}" for a, ok in rep.axiom_verdicts.items()]
    print("\n".join(out))
    if args.witness:
        from .harness import run_pipeline

        result = run_pipeline(inst, pipe, node_limit=args.node_budget)
        data: dict = {"committee": list(w.members), "provenance": list(w.provenance)}
        if result.base is not None and result.base.payments is not None:
            data["base_committee"] = list(result.base.committee.members)
            data["payments"] = json.loads(result.base.payments.to_json())
        with open(args.witness, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
            fh.write("\n")
    return 0


def _parse_committee(text: str) -> list[int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise CommitteeError(f"committee must be a list of candidate indices, got {text!r}") from exc


def _show_axiom(verdict: AxiomVerdict) -> list[str]:
    if verdict.holds:
        return ["pass"]
    wit = verdict.witness
    return [
        "fail",
        f"witness level: {wit.level}",
        f"witness candidates: {' '.join(map(str, wit.candidates))} ({' '.join(labels(wit.candidates))})",
        f"witness voters: {' '.join(map(str, sorted(wit.group)))}",
    ]


def cmd_check(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    members = _parse_committee(args.committee)
    w = Committee.of(members, "cli")
    members_of(inst, w)
    if args.axiom in ("jr", "ejr", "ejr+"):
        checker = {"jr": check_jr, "ejr": check_ejr, "ejr+": check_ejr_plus}[args.axiom]
        verdict = checker(inst, w, first_only=True)
        print("\n".join(_show_axiom(verdict)))
        return 0 if verdict.holds else EXIT_FAIL
    if args.axiom == "affordable":
        ok, ps = is_affordable(inst, w)
    elif args.axiom == "priceable":
        ok, ps = is_priceable(inst, w)
    else:
        total = Fraction(args.budget) if args.budget is not None else None
        ok, total, ps = is_b_priceable(inst, w, total)
        if ok:
            print(f"budget: {fmt_fraction(total)}")
    print("pass" if ok else "fail")
    if ok:
        print(f"payments: {ps.to_json()}")
        if args.witness:
            with open(args.witness, "w", encoding="utf-8") as fh:
                fh.write(ps.to_json() + "\n")
    return 0 if ok else EXIT_FAIL


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    for key in ("seed", "trials", "out", "workers"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.node_budget is not None:
        cfg.node_limit = args.node_budget
    cfg.validate()
    result = run_sweep(cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(result.csv_text)
    else:
        sys.stdout.write(result.csv_text)
    print(f"rows: {len(result.rows)} failures: {len(result.failures)}", file=sys.stderr)
    for row in result.failures:
        print(failure_report(cfg, row), file=sys.stderr)
    return EXIT_FAIL if result.failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affordable-committees", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance as JSON")
    g.add_argument("kind", choices=GENERATORS)
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--c", help="exponent for ejr-hard, e.g. 1/2")
    g.add_argument("--p", type=float, default=0.3)
    g.add_argument("--model", choices=("uniform-p", "party-blocks"), default="uniform-p")
    g.add_argument("--groups", type=int, default=2)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--group-size", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run a rule, optionally with a completion")
    r.add_argument("instance")
    r.add_argument("rule", help="rule, rule+completion, or a standalone method")
    r.add_argument("completion", nargs="?")
    r.add_argument("--axioms", default="jr,ejr+,affordable", help="comma-separated axiom list")
    r.add_argument("--witness", help="write the committee and payment witness as JSON")
    r.add_argument("--node-budget", type=int)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="check one axiom for a given committee")
    c.add_argument("instance")
    c.add_argument("committee", help="candidate indices, e.g. '10,11,12' ('' for the empty committee)")
    c.add_argument("axiom", choices=CHECKS)
    c.add_argument("--budget", help="total budget B for b-priceable (searched if omitted)")
    c.add_argument("--witness", help="write the payment witness as JSON")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("sweep", help="run a JSON-configured sweep and write a CSV report")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.add_argument("--node-budget", type=int)
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CommitteeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
