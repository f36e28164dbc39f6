"""Instances, committees, welfare/coverage metrics and the instance file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union


class CommitteeError(Exception):
    """Base class for all library errors."""


class InvalidCommitteeError(CommitteeError, ValueError):
    pass


class InstanceParseError(CommitteeError, ValueError):
    pass


class UndefinedRatioError(CommitteeError, ZeroDivisionError):
    pass


class ParameterError(CommitteeError, ValueError):
    pass


class ResourceLimitError(CommitteeError, RuntimeError):
    """A search exceeded its configured node/enumeration budget."""


@dataclass(frozen=True)
class Instance:
    """An approval profile over candidates ``0..num_candidates-1`` with committee size ``k``.

    Voters are identified by their position in ``approvals``; empty ballots are allowed.
    """

    num_candidates: int
    k: int
    approvals: tuple[frozenset[int], ...]
    approvers: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    # bitmask over voters for each candidate
    masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        approvals = tuple(frozenset(a) for a in self.approvals)
        object.__setattr__(self, "approvals", approvals)
        if len(approvals) < 1:
            raise ParameterError("an instance needs at least one voter")
        if self.num_candidates < 1:
            raise ParameterError("an instance needs at least one candidate")
        if not 1 <= self.k <= self.num_candidates:
            raise ParameterError(f"k={self.k} must satisfy 1 <= k <= m={self.num_candidates}")
        approvers: list[set[int]] = [set() for _ in range(self.num_candidates)]
        masks = [0] * self.num_candidates
        for i, ballot in enumerate(approvals):
            for c in ballot:
                if not (isinstance(c, int) and 0 <= c < self.num_candidates):
                    raise ParameterError(f"voter {i} approves out-of-range candidate {c!r}")
                approvers[c].add(i)
                masks[c] |= 1 << i
        object.__setattr__(self, "approvers", tuple(frozenset(s) for s in approvers))
        object.__setattr__(self, "masks", tuple(masks))

    @classmethod
    def from_lists(cls, num_candidates: int, k: int, voters: Iterable[Iterable[int]]) -> "Instance":
        return cls(num_candidates, k, tuple(frozenset(v) for v in voters))

    @property
    def n(self) -> int:
        return len(self.approvals)

    @property
    def m(self) -> int:
        return self.num_candidates

    @property
    def num_voters(self) -> int:
        return len(self.approvals)

    @property
    def candidates(self) -> range:
        return range(self.num_candidates)

    def approval_score(self, c: int) -> int:
        return len(self.approvers[c])

    def is_large(self, size: int, ell: int) -> bool:
        """Whether a group of ``size`` voters is ``ell``-large (size >= ell*n/k, exactly)."""
        return size * self.k >= ell * self.n


@dataclass(frozen=True)
class Committee:
    members: tuple[int, ...] = ()
    provenance: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if len(set(self.members)) != len(self.members):
            raise InvalidCommitteeError(f"duplicate members in {self.members}")
        if len(self.provenance) != len(self.members):
            raise InvalidCommitteeError("provenance must tag every member")

    @classmethod
    def of(cls, members: Iterable[int], tag: str = "given") -> "Committee":
        members = tuple(members)
        return cls(members, (tag,) * len(members))

    def extend(self, extra: Iterable[int], tag: str) -> "Committee":
        extra = tuple(extra)
        return Committee(self.members + extra, self.provenance + (tag,) * len(extra))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, c: object) -> bool:
        return c in self.members

    def as_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def is_exhaustive(self, inst: Instance) -> bool:
        return len(self.members) == inst.k


CommitteeLike = Union[Committee, Iterable[int]]


def members_of(inst: Instance, w: CommitteeLike, *, allow_oversize: bool = False) -> frozenset[int]:
    """Validate ``w`` against ``inst`` and return its member set."""
    members = tuple(w.members) if isinstance(w, Committee) else tuple(w)
    s = frozenset(members)
    if len(s) != len(members):
        raise InvalidCommitteeError(f"duplicate members in {members}")
    for c in s:
        if not (isinstance(c, int) and 0 <= c < inst.m):
            raise InvalidCommitteeError(f"candidate {c!r} out of range [0, {inst.m})")
    if not allow_oversize and len(s) > inst.k:
        raise InvalidCommitteeError(f"committee of size {len(s)} exceeds k={inst.k}")
    return s


def utilities(inst: Instance, w: CommitteeLike) -> list[int]:
    """Per-voter number of approved committee members."""
    s = members_of(inst, w, allow_oversize=True)
    return [len(a & s) for a in inst.approvals]


def covered_mask(inst: Instance, members: Iterable[int]) -> int:
    mask = 0
    for c in members:
        mask |= inst.masks[c]
    return mask


def social_welfare(inst: Instance, w: CommitteeLike) -> int:
    s = members_of(inst, w, allow_oversize=True)
    return sum(inst.approval_score(c) for c in s)


def coverage(inst: Instance, w: CommitteeLike) -> int:
    s = members_of(inst, w, allow_oversize=True)
    return covered_mask(inst, s).bit_count()


def optimal_welfare(inst: Instance) -> int:
    scores = sorted((inst.approval_score(c) for c in inst.candidates), reverse=True)
    return sum(scores[: inst.k])


def optimal_coverage(inst: Instance, node_limit: int | None = None) -> int:
    from .rules import cc_exact

    return coverage(inst, cc_exact(inst, node_limit=node_limit).committee)


def utilitarian_ratio(inst: Instance, w: CommitteeLike, sw_opt: int | None = None) -> Fraction:
    if sw_opt is None:
        sw_opt = optimal_welfare(inst)
    if sw_opt == 0:
        raise UndefinedRatioError("optimal welfare is zero")
    return Fraction(social_welfare(inst, w), sw_opt)


def representation_ratio(inst: Instance, w: CommitteeLike, cov_opt: int | None = None) -> Fraction:
    if cov_opt is None:
        cov_opt = optimal_coverage(inst)
    if cov_opt == 0:
        raise UndefinedRatioError("optimal coverage is zero")
    return Fraction(coverage(inst, w), cov_opt)


def max_unselected_approvals(inst: Instance, w: CommitteeLike) -> int:
    s = members_of(inst, w, allow_oversize=True)
    rest = [inst.approval_score(c) for c in inst.candidates if c not in s]
    if not rest:
        raise InvalidCommitteeError("every candidate is selected; no unselected candidate")
    return max(rest)


def geq_sqrt_expr(value: Fraction, const: Fraction, coef: Fraction, radicand: Fraction) -> bool:
    """Exactly decide ``value >= const + coef / sqrt(radicand)`` by squaring."""
    value, const, coef, radicand = map(Fraction, (value, const, coef, radicand))
    if radicand <= 0:
        raise ParameterError("radicand must be positive")
    d = value - const
    if coef >= 0:
        return d >= 0 and d * d * radicand >= coef * coef
    return d >= 0 or d * d * radicand <= coef * coef


def floor_sqrt_multiple(a: int, k: int) -> int:
    """floor(a * sqrt(k)) for non-negative integers, exactly."""
    return math.isqrt(a * a * k)


# -- instance file format ---------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    return {
        "k": inst.k,
        "num_candidates": inst.m,
        "voters": [sorted(a) for a in inst.approvals],
    }


def dumps_instance(inst: Instance) -> str:
    voters = ",\n".join("    " + json.dumps(sorted(a)) for a in inst.approvals)
    return (
        "{\n"
        f'  "k": {inst.k},\n'
        f'  "num_candidates": {inst.m},\n'
        f'  "voters": [\n{voters}\n  ]\n'
        "}\n"
    )


def instance_from_dict(data: Mapping) -> Instance:
    if not isinstance(data, Mapping):
        raise InstanceParseError("top level must be a JSON object")
    for key in ("k", "num_candidates", "voters"):
        if key not in data:
            raise InstanceParseError(f"missing field {key!r}")
    k, m, voters = data["k"], data["num_candidates"], data["voters"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise InstanceParseError(f"field 'num_candidates': expected a positive integer, got {m!r}")
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= m:
        raise InstanceParseError(f"field 'k': expected an integer in [1, {m}], got {k!r}")
    if not isinstance(voters, list) or not voters:
        raise InstanceParseError("field 'voters': expected a non-empty list of approval lists")
    ballots = []
    for i, ballot in enumerate(voters):
        if not isinstance(ballot, list):
            raise InstanceParseError(f"field 'voters[{i}]': expected a list")
        for j, c in enumerate(ballot):
            if not isinstance(c, int) or isinstance(c, bool):
                raise InstanceParseError(f"field 'voters[{i}][{j}]': expected an integer, got {c!r}")
            if not 0 <= c < m:
                raise InstanceParseError(
                    f"field 'voters[{i}][{j}]': candidate {c} out of range [0, {m})"
                )
        if len(set(ballot)) != len(ballot):
            raise InstanceParseError(f"field 'voters[{i}]': duplicate candidates")
        ballots.append(frozenset(ballot))
    return Instance(m, k, tuple(ballots))


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return instance_from_dict(data)


def load_instance(path: str | Path) -> Instance:
    return loads_instance(Path(path).read_text(encoding="utf-8"))


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst), encoding="utf-8")


@dataclass(frozen=True)
class GuaranteeReport:
    sw: int
    cov: int
    sw_opt: int
    cov_opt: int
    axiom_verdicts: Mapping[str, bool] = field(default_factory=dict)
    bound_checks: Mapping[str, bool] = field(default_factory=dict)

    @property
    def utilitarian_ratio(self) -> Fraction:
        if self.sw_opt == 0:
            raise UndefinedRatioError("optimal welfare is zero")
        return Fraction(self.sw, self.sw_opt)

    @property
    def representation_ratio(self) -> Fraction:
        if self.cov_opt == 0:
            raise UndefinedRatioError("optimal coverage is zero")
        return Fraction(self.cov, self.cov_opt)


def fmt_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str | int | Fraction) -> Fraction:
    return Fraction(text)


def label(c: int) -> str:
    """1-based display name, matching the usual c1..cm notation."""
    return f"c{c + 1}"


def labels(members: Sequence[int]) -> list[str]:
    return [label(c) for c in members]
