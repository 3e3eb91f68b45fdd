"""Braided (Charlieplexed) DAC addressing.

Within one power domain every unordered pair of the ``n`` shared address lines
selects two DAC stages, one per relative polarity of the two lines. A stage
fires iff its domain is powered, both of its lines are driven and the relative
polarity of the drive matches.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

SAME = 0
OPPOSITE = 1


class AddressingError(ValueError):
    pass


class CapacityError(AddressingError):
    def __init__(self, requested: int, capacity: int):
        self.requested = requested
        self.capacity = capacity
        self.deficit = requested - capacity
        super().__init__(
            f"{requested} stages requested but the scheme addresses only {capacity} "
            f"(deficit {self.deficit})"
        )


@dataclass(frozen=True)
class XyzScheme:
    x: int
    y: int
    z: int

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if getattr(self, name) < 1:
                raise AddressingError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class BraidedScheme:
    n: int
    z: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise AddressingError(f"braided scheme needs n >= 2 lines, got {self.n}")
        if self.z < 1:
            raise AddressingError(f"need at least one power domain, got z={self.z}")

    @property
    def per_domain(self) -> int:
        return self.n * (self.n - 1)


class StageAddress(NamedTuple):
    domain: int
    a: int  # lower line index
    b: int  # higher line index
    polarity: int  # relative polarity, SAME or OPPOSITE

    @classmethod
    def make(cls, domain: int, lines, polarity: int) -> "StageAddress":
        a, b = lines
        if a > b:
            a, b = b, a
        return cls(int(domain), int(a), int(b), int(polarity))


def capacity_xyz(s: XyzScheme) -> int:
    return 2 * s.x * s.y * s.z


def capacity_braided(s: BraidedScheme) -> int:
    return s.n * (s.n - 1) * s.z


def domain_loads(s: BraidedScheme, stage_count: int) -> list[int]:
    q, r = divmod(stage_count, s.z)
    return [q + 1 if d < r else q for d in range(s.z)]


@dataclass(frozen=True)
class FireResult:
    stages: tuple[int, ...]
    half_selected: int  # stages in the powered domain sharing exactly one driven line
    half_selected_same_polarity: int


@dataclass(frozen=True)
class AddressingPlan:
    """Stage id ``i`` is driven by ``assignments[i]``."""

    scheme: BraidedScheme
    assignments: tuple[StageAddress, ...]
    layout: str = "repetition"
    _index: dict = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.assignments)

    def _build_index(self) -> dict:
        selectors = defaultdict(list)
        line_use: Counter = Counter()
        line_pol: Counter = Counter()
        pair_use: Counter = Counter()
        pair_pol: Counter = Counter()
        for stage, addr in enumerate(self.assignments):
            selectors[addr].append(stage)
            for line in (addr.a, addr.b):
                line_use[addr.domain, line] += 1
                line_pol[addr.domain, line, addr.polarity] += 1
            pair_use[addr.domain, addr.a, addr.b] += 1
            pair_pol[addr.domain, addr.a, addr.b, addr.polarity] += 1
        return {
            "selectors": dict(selectors),
            "line_use": line_use,
            "line_pol": line_pol,
            "pair_use": pair_use,
            "pair_pol": pair_pol,
        }

    @property
    def index(self) -> dict:
        if self._index is None:
            object.__setattr__(self, "_index", self._build_index())
        return self._index

    def domain_counts(self) -> list[int]:
        counts = Counter(a.domain for a in self.assignments)
        return [counts.get(d, 0) for d in range(self.scheme.z)]


def plan(s: BraidedScheme, stage_count: int, layout: str = "repetition") -> AddressingPlan:
    """Assign stages to selectors, spreading them evenly over power domains.

    Stage ids are allocated domain by domain; inside a domain selectors are
    taken in lexicographic ``(min line, max line, polarity)`` order.
    """
    if layout not in ("repetition", "interleaving"):
        raise AddressingError(f"unknown domain layout {layout!r}")
    if stage_count < 0:
        raise AddressingError(f"stage_count must be >= 0, got {stage_count}")
    cap = capacity_braided(s)
    if stage_count > cap:
        raise CapacityError(stage_count, cap)
    per_domain_selectors = [
        (a, b, pol)
        for a, b in itertools.combinations(range(s.n), 2)
        for pol in (SAME, OPPOSITE)
    ]
    assignments: list[StageAddress] = []
    for domain, load in enumerate(domain_loads(s, stage_count)):
        assignments.extend(
            StageAddress(domain, a, b, pol) for a, b, pol in per_domain_selectors[:load]
        )
    return AddressingPlan(s, tuple(assignments), layout)


def fire_set(p: AddressingPlan, drive: StageAddress) -> FireResult:
    drive = StageAddress.make(drive[0], (drive[1], drive[2]), drive[3])
    s = p.scheme
    if not (0 <= drive.domain < s.z and 0 <= drive.a < drive.b < s.n and drive.polarity in (0, 1)):
        raise AddressingError(f"drive {tuple(drive)} outside scheme n={s.n}, z={s.z}")
    idx = p.index
    d, a, b, pol = drive
    fired = tuple(idx["selectors"].get(drive, ()))
    touching = idx["line_use"][d, a] + idx["line_use"][d, b]
    both = idx["pair_use"][d, a, b]
    touching_pol = idx["line_pol"][d, a, pol] + idx["line_pol"][d, b, pol]
    both_pol = idx["pair_pol"][d, a, b, pol]
    return FireResult(fired, touching - 2 * both, touching_pol - 2 * both_pol)


def verify(p: AddressingPlan) -> dict:
    """Check range validity, injectivity and exact selection of a plan.

    Work is partitioned by power domain; the report does not depend on the
    partitioning.
    """
    s = p.scheme
    violations: list[dict] = []
    by_domain: dict[int, list[int]] = defaultdict(list)
    for stage, addr in enumerate(p.assignments):
        in_range = (
            0 <= addr.domain < s.z
            and 0 <= addr.a < s.n
            and 0 <= addr.b < s.n
            and addr.a != addr.b
            and addr.polarity in (SAME, OPPOSITE)
        )
        if not in_range:
            violations.append({"type": "out_of_range", "stage": stage, "address": list(addr)})
        else:
            by_domain[addr.domain].append(stage)

    for domain in sorted(by_domain):
        for stage in by_domain[domain]:
            addr = p.assignments[stage]
            fired = fire_set(p, addr).stages
            if len(fired) > 1 and fired[0] == stage:
                violations.append(
                    {"type": "not_injective", "address": list(addr), "stages": list(fired)}
                )
            if stage not in fired:
                violations.append({"type": "not_selectable", "stage": stage})
    return {
        "valid": not violations,
        "stages": len(p.assignments),
        "domains": s.z,
        "violations": violations,
    }


def programming_time_estimate(
    p: AddressingPlan, per_event_time: float, domain_parallelism: bool = False
) -> float:
    """Time to program every stage, one programming event per stage.

    With ``domain_parallelism`` the power domains are programmed concurrently,
    so the most heavily loaded domain sets the time.
    """
    if not per_event_time > 0:
        raise AddressingError(f"per_event_time must be > 0, got {per_event_time}")
    if not p.assignments:
        return 0.0
    events = max(p.domain_counts()) if domain_parallelism else len(p.assignments)
    return events * per_event_time


def to_dict(p: AddressingPlan) -> dict:
    return {
        "scheme": {"n": p.scheme.n, "z": p.scheme.z},
        "layout": p.layout,
        "assignments": [
            {"stage": i, "domain": a.domain, "lines": [a.a, a.b], "polarity": a.polarity}
            for i, a in enumerate(p.assignments)
        ],
    }


def from_dict(data: dict) -> AddressingPlan:
    try:
        scheme = BraidedScheme(int(data["scheme"]["n"]), int(data["scheme"]["z"]))
        rows = sorted(data["assignments"], key=lambda r: int(r["stage"]))
        if [int(r["stage"]) for r in rows] != list(range(len(rows))):
            raise AddressingError("stage ids must be 0..N-1 without gaps")
        assignments = tuple(
            StageAddress.make(r["domain"], r["lines"], r["polarity"]) for r in rows
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, AddressingError):
            raise
        raise AddressingError(f"malformed plan document: {exc!r}") from None
    return AddressingPlan(scheme, assignments, data.get("layout", "repetition"))


def dumps(p: AddressingPlan) -> str:
    return json.dumps(to_dict(p), separators=(",", ":")) + "\n"


def suggest_line_count(stage_count: int, domains: int) -> int:
    """Smallest odd line count whose braided scheme holds ``stage_count`` stages."""
    per_domain = -(-stage_count // domains) if stage_count else 0
    n = 3
    while n * (n - 1) < per_domain:
        n += 2
    return n
