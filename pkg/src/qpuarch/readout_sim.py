"""Shift-register readout fabric and frequency-multiplexed resonator plan.

Every track is a line of flux-parametron stages with a resonator at each end.
At the end of the anneal each qubit's bit is latched into its attach stage;
the register then advances one stage per bit period (three clock phases),
and a resonator reports whatever bit sits in its end stage.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .topology import QubitCoordinate, TopologyGraph

LOW, HIGH = "low", "high"
FEEDLINES = 2


class ReadoutError(ValueError):
    pass


class CollisionError(RuntimeError):
    """Two bits occupied one stage at one time; the layout or simulator is inconsistent."""


@dataclass(frozen=True)
class Track:
    id: int
    orientation: str
    stage_count: int
    attach: dict  # QubitCoordinate -> stage index
    resonators: tuple[int | None, int | None] = (None, None)  # (low end, high end)

    def __post_init__(self):
        if self.stage_count < 1:
            raise ReadoutError(f"track {self.id}: stage_count must be positive")
        stages = list(self.attach.values())
        if any(not 0 <= s < self.stage_count for s in stages):
            raise ReadoutError(f"track {self.id}: attach index outside [0, {self.stage_count})")
        if len(set(stages)) != len(stages):
            raise ReadoutError(f"track {self.id}: two qubits attached to one stage")

    def distance(self, stage: int, end: str) -> int:
        return stage if end == LOW else self.stage_count - 1 - stage

    def resonator(self, end: str) -> int | None:
        return self.resonators[0 if end == LOW else 1]


@dataclass(frozen=True)
class ReadoutLayout:
    tracks: tuple[Track, ...]
    routing: dict  # QubitCoordinate -> (track id, end)
    _owner: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        owner: dict[QubitCoordinate, int] = {}
        for t in self.tracks:
            for q in t.attach:
                if q in owner:
                    raise ReadoutError(f"qubit {tuple(q)} attached to tracks {owner[q]} and {t.id}")
                owner[q] = t.id
        for q, (tid, end) in self.routing.items():
            if owner.get(q) != tid:
                raise ReadoutError(f"qubit {tuple(q)} routed to track {tid} it is not attached to")
            if end not in (LOW, HIGH):
                raise ReadoutError(f"unknown track end {end!r}")
        if set(self.routing) != set(owner):
            raise ReadoutError("every attached qubit needs exactly one route")
        object.__setattr__(self, "_owner", owner)

    def track(self, tid: int) -> Track:
        return self.tracks[tid]

    @property
    def qubits(self) -> list[QubitCoordinate]:
        return sorted(self._owner)

    def routed_distance(self, q: QubitCoordinate) -> int:
        tid, end = self.routing[q]
        t = self.tracks[tid]
        return t.distance(t.attach[q], end)

    def total_stages(self) -> int:
        return sum(t.stage_count for t in self.tracks)

    def resonator_ids(self) -> list[int]:
        return sorted(r for t in self.tracks for r in t.resonators if r is not None)


@dataclass(frozen=True)
class ClockProgram:
    """Clock lines at ``line_frequency`` Hz; one shift takes ``phases_per_shift`` cycles."""

    line_frequency: float = 30e6
    phases_per_shift: int = 3

    def __post_init__(self):
        if not self.line_frequency > 0 or self.phases_per_shift < 1:
            raise ReadoutError("clock frequency and phase count must be positive")

    @property
    def clock_period(self) -> float:
        return 1.0 / self.line_frequency

    @property
    def bit_period(self) -> float:
        return self.phases_per_shift / self.line_frequency

    @property
    def bit_rate(self) -> Fraction:
        """Exact per-track data rate in bits per second."""
        return Fraction(self.line_frequency) / self.phases_per_shift


def _route_nearer(track: Track) -> dict:
    routes = {}
    for q, stage in track.attach.items():
        low, high = track.distance(stage, LOW), track.distance(stage, HIGH)
        routes[q] = (track.id, LOW if low <= high else HIGH)
    return routes


def _balanced_chunks(items: list, parts: int) -> list[list]:
    q, r = divmod(len(items), parts)
    out, start = [], 0
    for i in range(parts):
        size = q + (1 if i < r else 0)
        out.append(items[start:start + size])
        start += size
    return out


def build_layout(g: TopologyGraph, tracks_total: int, stages_per_attach: int = 1) -> ReadoutLayout:
    """Linear-track layout: half the tracks serve vertical qubits, half horizontal.

    Each orientation's qubits, in coordinate order, are cut into contiguous
    bands of near-equal size (the band sizes differ by at most one). A qubit
    occupies ``stages_per_attach`` stages of its track and is routed to the
    nearer end, ties going to the low end.
    """
    if tracks_total < 2 or tracks_total % 2:
        raise ReadoutError(f"tracks_total must be even and >= 2, got {tracks_total}")
    if stages_per_attach < 1:
        raise ReadoutError("stages_per_attach must be >= 1")
    per_orientation = tracks_total // 2
    tracks: list[Track] = []
    routing: dict = {}
    for u, name in ((0, "vertical"), (1, "horizontal")):
        qubits = sorted(q for q in g.vertices if q.u == u)
        for band in _balanced_chunks(qubits, per_orientation):
            tid = len(tracks)
            track = Track(
                id=tid,
                orientation=name,
                stage_count=max(len(band), 1) * stages_per_attach,
                attach={q: i * stages_per_attach for i, q in enumerate(band)},
                resonators=(2 * tid, 2 * tid + 1),
            )
            tracks.append(track)
            routing.update(_route_nearer(track))
    return ReadoutLayout(tuple(tracks), routing)


def _attach_point(g: TopologyGraph, q: QubitCoordinate) -> tuple[int, int]:
    s = g.segment(q)
    mid = (s.span_start + s.span_end) // 2
    return (s.axis_position, mid) if q.u == 0 else (mid, s.axis_position)


def serpentine_baseline(g: TopologyGraph, stages_per_attach: int = 1) -> ReadoutLayout:
    """Previous-generation comparator: one snaking register per fabric half.

    Each register visits every qubit of its half (split by tile row of the
    qubit's midpoint) in boustrophedon tile order. Moving between consecutive
    attach points costs one stage per grid unit of Manhattan distance, and at
    least ``stages_per_attach`` stages.
    """
    m = g.m
    halves: list[list] = [[], []]
    for q in g.vertices:
        x, y = _attach_point(g, q)
        halves[0 if y // 12 < m // 2 else 1].append(q)

    def order(q):
        x, y = _attach_point(g, q)
        tx, ty = x // 12, y // 12
        return (ty, tx if ty % 2 == 0 else m - 1 - tx, x, y)

    tracks: list[Track] = []
    routing: dict = {}
    for half in halves:
        qubits = sorted(half, key=order)
        attach: dict = {}
        stage = 0
        prev = None
        for q in qubits:
            p = _attach_point(g, q)
            if prev is not None:
                stage += max(stages_per_attach, abs(p[0] - prev[0]) + abs(p[1] - prev[1]))
            attach[q] = stage
            prev = p
        tid = len(tracks)
        track = Track(tid, "serpentine", stage + stages_per_attach, attach, (2 * tid, 2 * tid + 1))
        tracks.append(track)
        routing.update(_route_nearer(track))
    return ReadoutLayout(tuple(tracks), routing)


class ReadoutEvent(NamedTuple):
    tick: int
    time_s: float
    resonator: int
    bit: int
    qubit: QubitCoordinate


def simulate_track(layout: ReadoutLayout, track: Track, states: dict,
                   clock: ClockProgram) -> list[ReadoutEvent]:
    """Lockstep shift simulation of one track's two half-registers."""
    events: list[ReadoutEvent] = []
    for end in (LOW, HIGH):
        qubits = sorted(q for q in track.attach if layout.routing[q][1] == end)
        if not qubits:
            continue
        resonator = track.resonator(end)
        step = -1 if end == LOW else 1
        terminal = 0 if end == LOW else track.stage_count - 1
        pos = np.array([track.attach[q] for q in qubits], dtype=np.int64)
        live = np.ones(len(qubits), dtype=bool)
        tick = 0
        while live.any():
            occupied = pos[live]
            if np.unique(occupied).size != occupied.size:
                raise CollisionError(f"track {track.id} {end}: stage collision at tick {tick}")
            arrived = np.flatnonzero(live & (pos == terminal))
            for i in arrived:
                q = qubits[i]
                events.append(ReadoutEvent(tick, tick * clock.bit_period, resonator,
                                           int(states[q]), q))
            live[arrived] = False
            pos[live] += step
            tick += 1
    return events


def merge_events(logs) -> list[ReadoutEvent]:
    merged = [e for log in logs for e in log]
    merged.sort(key=lambda e: (e.tick, e.resonator, e.qubit))
    return merged


def simulate_readout(layout: ReadoutLayout, states: dict, clock: ClockProgram) -> list[ReadoutEvent]:
    missing = [q for q in layout.qubits if q not in states]
    if missing:
        raise ReadoutError(f"{len(missing)} attached qubits have no state, e.g. {tuple(missing[0])}")
    return merge_events(simulate_track(layout, t, states, clock) for t in layout.tracks)


def measured_rate(events: list[ReadoutEvent], clock: ClockProgram) -> Fraction:
    """Bits per second delivered by one resonator stream, computed exactly from ticks."""
    if len(events) < 2:
        raise ReadoutError("need at least two events to measure a rate")
    ticks = sorted(e.tick for e in events)
    span = ticks[-1] - ticks[0]
    return Fraction(len(ticks) - 1, span) * clock.bit_rate


def readout_time(layout: ReadoutLayout, clock: ClockProgram) -> tuple[float, dict[int, float]]:
    per_track: dict[int, float] = {}
    worst = 0
    for t in layout.tracks:
        d = max((t.distance(s, layout.routing[q][1]) for q, s in t.attach.items()), default=0)
        per_track[t.id] = d * clock.bit_period
        worst = max(worst, d)
    return worst * clock.bit_period, per_track


def compare_layout_lengths(a: ReadoutLayout, b: ReadoutLayout) -> float:
    if not a.tracks or not b.tracks:
        raise ReadoutError("cannot compare an empty layout")
    return a.total_stages() / b.total_stages()


@dataclass(frozen=True)
class ResonatorPlan:
    frequencies: dict  # resonator id -> Hz
    feedline: dict  # resonator id -> 0 or 1
    min_spacing: float
    band: tuple[float, float]

    def same_line_separations(self) -> list[float]:
        seps = []
        for line in range(FEEDLINES):
            f = sorted(self.frequencies[r] for r, ln in self.feedline.items() if ln == line)
            seps.extend(b - a for a, b in zip(f, f[1:]))
        return seps

    def to_dict(self) -> dict:
        return {
            "band_hz": list(self.band),
            "min_spacing_hz": self.min_spacing,
            "resonators": [
                {"id": r, "feedline": self.feedline[r], "frequency_hz": self.frequencies[r]}
                for r in sorted(self.frequencies)
            ],
        }


def allocate_frequencies(n_resonators: int, band: tuple[float, float],
                         min_spacing: float) -> ResonatorPlan:
    """Alternate resonators over two feedlines and spread each line's set uniformly over the band."""
    f_lo, f_hi = band
    if n_resonators < 1:
        raise ReadoutError("need at least one resonator")
    if not f_hi > f_lo:
        raise ReadoutError(f"band [{f_lo}, {f_hi}] is empty")
    if not min_spacing > 0:
        raise ReadoutError("min_spacing must be positive")
    per_line = math.ceil(n_resonators / FEEDLINES)
    needed = (per_line - 1) * min_spacing
    if needed > f_hi - f_lo:
        raise ReadoutError(
            f"{per_line} resonators per feedline need {needed:.6g} Hz but the band is "
            f"{f_hi - f_lo:.6g} Hz wide"
        )
    freqs: dict[int, float] = {}
    lines: dict[int, int] = {}
    for line in range(FEEDLINES):
        ids = list(range(line, n_resonators, FEEDLINES))
        c = len(ids)
        for j, r in enumerate(ids):
            freqs[r] = (f_lo + f_hi) / 2 if c == 1 else f_lo + j * (f_hi - f_lo) / (c - 1)
            lines[r] = line
    return ResonatorPlan(freqs, lines, float(min_spacing), (float(f_lo), float(f_hi)))


# -- serialization ---------------------------------------------------------


def layout_to_dict(layout: ReadoutLayout) -> dict:
    return {
        "tracks": [
            {
                "id": t.id,
                "orientation": t.orientation,
                "stage_count": t.stage_count,
                "resonators": list(t.resonators),
                "attach": [
                    {"qubit": list(q), "stage": s, "end": layout.routing[q][1]}
                    for q, s in sorted(t.attach.items(), key=lambda kv: kv[1])
                ],
            }
            for t in layout.tracks
        ]
    }


def layout_from_dict(data: dict) -> ReadoutLayout:
    tracks, routing = [], {}
    try:
        for t in sorted(data["tracks"], key=lambda t: int(t["id"])):
            attach = {}
            for row in t["attach"]:
                q = QubitCoordinate(*map(int, row["qubit"]))
                attach[q] = int(row["stage"])
                routing[q] = (int(t["id"]), row["end"])
            res = t.get("resonators", [None, None])
            tracks.append(Track(int(t["id"]), t["orientation"], int(t["stage_count"]),
                                attach, (res[0], res[1])))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ReadoutError):
            raise
        raise ReadoutError(f"malformed layout document: {exc!r}") from None
    if [t.id for t in tracks] != list(range(len(tracks))):
        raise ReadoutError("track ids must be 0..T-1")
    return ReadoutLayout(tuple(tracks), routing)


def events_to_csv(events: list[ReadoutEvent]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_s", "resonator", "bit", "qubit"])
    for e in events:
        w.writerow([repr(e.time_s), e.resonator, e.bit, "{}:{}:{}:{}".format(*e.qubit)])
    return buf.getvalue()


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
