"""Tiled degree-15 qubit topology.

Qubits are named by ``(orientation, w, k, z)`` 4-tuples. Orientation 0 is a
vertical qubit, 1 a horizontal one. A qubit's long body is a segment of 12 grid
units: its fixed axis coordinate is ``12*w + k`` and it spans
``[12*z + offset[orientation][k], ... + 12)`` along the other axis. Couplers
come in three kinds:

* internal: a vertical and a horizontal qubit whose segments cross,
* external: two colinear qubits on the same track with ``z`` differing by one,
* odd: the two members of a parallel pair ``k in {2j, 2j+1}``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

TRACKS_PER_TILE = 12
SPAN = 12
MAX_DEGREE = 15

INTERNAL = "internal"
EXTERNAL = "external"
ODD = "odd"
KINDS = (INTERNAL, EXTERNAL, ODD)

DEFAULT_OFFSETS = (
    (2, 2, 2, 2, 6, 6, 6, 6, 10, 10, 10, 10),
    (6, 6, 6, 6, 10, 10, 10, 10, 2, 2, 2, 2),
)


class TopologyError(ValueError):
    """Invalid topology parameters or out-of-range queries."""


class QubitCoordinate(NamedTuple):
    u: int  # orientation: 0 vertical, 1 horizontal
    w: int  # perpendicular tile offset
    k: int  # track index within the tile
    z: int  # parallel tile offset


class QubitSegment(NamedTuple):
    axis_position: int
    span_start: int
    span_end: int


def validate_offsets(offsets) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Normalize an offset table and check the odd-pair equality constraint."""
    try:
        table = tuple(tuple(int(v) for v in row) for row in offsets)
    except (TypeError, ValueError) as exc:
        raise TopologyError(f"offset table is not a 2x12 integer table: {exc}") from None
    if len(table) != 2 or any(len(row) != TRACKS_PER_TILE for row in table):
        raise TopologyError("offset table must have 2 rows of 12 integers")
    for u, row in enumerate(table):
        for k, v in enumerate(row):
            if not 0 <= v < SPAN:
                raise TopologyError(f"offset[{u}][{k}]={v} outside [0, 12)")
        for j in range(TRACKS_PER_TILE // 2):
            if row[2 * j] != row[2 * j + 1]:
                raise TopologyError(
                    f"odd pair ({2 * j}, {2 * j + 1}) of orientation {u} has unequal "
                    f"offsets {row[2 * j]} != {row[2 * j + 1]}"
                )
    return table  # type: ignore[return-value]


def qubit_segment(q: QubitCoordinate, offsets) -> QubitSegment:
    start = SPAN * q.z + offsets[q.u][q.k]
    return QubitSegment(TRACKS_PER_TILE * q.w + q.k, start, start + SPAN)


def segments_cross(a: QubitSegment, b: QubitSegment, perpendicular: bool) -> bool:
    """True iff two perpendicular segments intersect (half-open spans)."""
    return (
        perpendicular
        and b.span_start <= a.axis_position < b.span_end
        and a.span_start <= b.axis_position < a.span_end
    )


@dataclass(frozen=True)
class Coupler:
    kind: str
    a: QubitCoordinate
    b: QubitCoordinate

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TopologyError(f"unknown coupler kind {self.kind!r}")
        if self.a == self.b:
            raise TopologyError("coupler endpoints must differ")
        if self.b < self.a:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def endpoints(self) -> tuple[QubitCoordinate, QubitCoordinate]:
        return (self.a, self.b)


@dataclass(frozen=True)
class TopologyGraph:
    """Immutable qubit graph; vertices and edges are stored in canonical order."""

    m: int
    offsets: tuple
    vertices: tuple[QubitCoordinate, ...]
    edges: tuple[Coupler, ...]
    _adjacency: dict = field(default=None, repr=False, compare=False)

    @property
    def adjacency(self) -> dict[QubitCoordinate, frozenset[QubitCoordinate]]:
        if self._adjacency is None:
            adj: dict[QubitCoordinate, set] = {v: set() for v in self.vertices}
            for e in self.edges:
                adj.setdefault(e.a, set()).add(e.b)
                adj.setdefault(e.b, set()).add(e.a)
            object.__setattr__(
                self, "_adjacency", {v: frozenset(n) for v, n in adj.items()}
            )
        return self._adjacency

    def neighbors(self, q: QubitCoordinate) -> frozenset[QubitCoordinate]:
        return self.adjacency.get(q, frozenset())

    def degree(self, q: QubitCoordinate) -> int:
        return len(self.neighbors(q))

    def has_edge(self, p: QubitCoordinate, q: QubitCoordinate) -> bool:
        return q in self.neighbors(p)

    def segment(self, q: QubitCoordinate) -> QubitSegment:
        return qubit_segment(q, self.offsets)

    def kind_counts(self) -> dict[str, int]:
        counts = Counter(e.kind for e in self.edges)
        return {kind: counts.get(kind, 0) for kind in KINDS}

    def without_kinds(self, *kinds: str) -> "TopologyGraph":
        """Copy of the graph with every coupler of the given kinds removed."""
        edges = tuple(e for e in self.edges if e.kind not in kinds)
        return TopologyGraph(self.m, self.offsets, self.vertices, edges)

    @property
    def tile_grid(self) -> int:
        return self.m


def _coordinates(m: int) -> list[QubitCoordinate]:
    return [
        QubitCoordinate(u, w, k, z)
        for u in range(2)
        for w in range(m)
        for k in range(TRACKS_PER_TILE)
        for z in range(m - 1)
    ]


def build_topology(m: int, offsets=DEFAULT_OFFSETS) -> TopologyGraph:
    """Build the ideal fabric for an ``m x m`` tile grid.

    Internal couplers are found by walking each vertical qubit's span and
    looking up the unique horizontal qubit (if any) whose body covers the
    vertical axis at that row, so construction is linear in the edge count.
    """
    if not isinstance(m, int) or isinstance(m, bool):
        raise TopologyError(f"m must be an integer, got {m!r}")
    if m < 2:
        raise TopologyError(f"m must be >= 2 (z range [0, m-1) is empty for m={m})")
    offsets = validate_offsets(offsets)
    vertices = _coordinates(m)
    edges: list[Coupler] = []

    for q in vertices:
        if q.u != 0:
            continue
        x = TRACKS_PER_TILE * q.w + q.k
        start = SPAN * q.z + offsets[0][q.k]
        for y in range(start, start + SPAN):
            w2, k2 = divmod(y, TRACKS_PER_TILE)
            if w2 >= m:
                break
            rel = x - offsets[1][k2]
            if rel < 0:
                continue
            z2 = rel // SPAN
            if z2 < m - 1:
                edges.append(Coupler(INTERNAL, q, QubitCoordinate(1, w2, k2, z2)))

    for q in vertices:
        if q.z + 1 < m - 1:
            edges.append(Coupler(EXTERNAL, q, q._replace(z=q.z + 1)))
        if q.k % 2 == 0:
            edges.append(Coupler(ODD, q, q._replace(k=q.k + 1)))

    edges.sort(key=lambda e: (e.a, e.b))
    return TopologyGraph(m, offsets, tuple(vertices), tuple(edges))


def coupling_point(g: TopologyGraph, e: Coupler) -> tuple[float, float]:
    """Location ``(x, y)`` of a coupler, used to assign it to a tile.

    Odd couplers sit at the midpoint of the pair's overlap, which may fall on
    a tile boundary; :func:`coupler_tile` resolves that tie to the lower tile.
    """
    sa, sb = g.segment(e.a), g.segment(e.b)
    if e.kind == INTERNAL:
        v, h = (sa, sb) if e.a.u == 0 else (sb, sa)
        return (v.axis_position, h.axis_position)
    if e.kind == EXTERNAL:
        along = max(sa.span_start, sb.span_start)
        across = sa.axis_position
    else:
        along = (sa.span_start + sa.span_end) / 2
        across = (sa.axis_position + sb.axis_position) / 2
    return (across, along) if e.a.u == 0 else (along, across)


def coupler_tile(g: TopologyGraph, e: Coupler) -> tuple[int, int]:
    x, y = coupling_point(g, e)
    if e.kind == ODD:
        along = y if e.a.u == 0 else x
        lowered = along % TRACKS_PER_TILE == 0 and along > 0
        tx, ty = int(x // TRACKS_PER_TILE), int(y // TRACKS_PER_TILE)
        if lowered:
            if e.a.u == 0:
                ty -= 1
            else:
                tx -= 1
        return (tx, ty)
    return (int(x // TRACKS_PER_TILE), int(y // TRACKS_PER_TILE))


def tile_census(g: TopologyGraph, tile_row: int, tile_col: int) -> tuple[int, int, int]:
    """Count ``(internal, external, odd)`` couplers whose coupling point lies in a tile.

    Tile ``(i, j)`` covers ``x in [12i, 12i+12)`` and ``y in [12j, 12j+12)``.
    """
    for name, idx in (("tile_row", tile_row), ("tile_col", tile_col)):
        if not 0 <= idx < g.tile_grid:
            raise TopologyError(f"{name}={idx} outside tile grid [0, {g.tile_grid})")
    counts = Counter(
        e.kind for e in g.edges if coupler_tile(g, e) == (tile_row, tile_col)
    )
    return (counts[INTERNAL], counts[EXTERNAL], counts[ODD])


def full_census(g: TopologyGraph) -> dict[tuple[int, int], tuple[int, int, int]]:
    """Census of every tile in one pass."""
    acc: dict[tuple[int, int], Counter] = {
        (i, j): Counter() for i in range(g.tile_grid) for j in range(g.tile_grid)
    }
    for e in g.edges:
        acc[coupler_tile(g, e)][e.kind] += 1
    return {t: (c[INTERNAL], c[EXTERNAL], c[ODD]) for t, c in acc.items()}


def interior_tiles(g: TopologyGraph) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, g.m - 1) for j in range(1, g.m - 1)]


def degree_histogram(g: TopologyGraph) -> dict[int, int]:
    hist = Counter(g.degree(v) for v in g.vertices)
    return dict(sorted(hist.items()))


def triangle_count(g: TopologyGraph) -> int:
    adj = g.adjacency
    total = 0
    for e in g.edges:
        total += len(adj[e.a] & adj[e.b])
    return total // 3


def find_triangle(g: TopologyGraph) -> tuple[QubitCoordinate, ...] | None:
    """First 3-cycle in canonical edge order, built on an odd coupler when possible."""
    adj = g.adjacency
    ordered = sorted(g.edges, key=lambda e: (e.kind != ODD, e.a, e.b))
    for e in ordered:
        common = adj[e.a] & adj[e.b]
        if common:
            return (e.a, e.b, min(common))
    return None


# -- serialization ---------------------------------------------------------


def to_dict(g: TopologyGraph) -> dict:
    return {
        "m": g.m,
        "offsets": {"vertical": list(g.offsets[0]), "horizontal": list(g.offsets[1])},
        "vertices": [list(v) for v in g.vertices],
        "edges": [{"kind": e.kind, "a": list(e.a), "b": list(e.b)} for e in g.edges],
    }


def from_dict(data: dict) -> TopologyGraph:
    try:
        m = int(data["m"])
        offsets = validate_offsets(
            (data["offsets"]["vertical"], data["offsets"]["horizontal"])
        )
        vertices = tuple(sorted(QubitCoordinate(*map(int, v)) for v in data["vertices"]))
        edges = sorted(
            (
                Coupler(
                    e["kind"],
                    QubitCoordinate(*map(int, e["a"])),
                    QubitCoordinate(*map(int, e["b"])),
                )
                for e in data["edges"]
            ),
            key=lambda e: (e.a, e.b),
        )
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"malformed graph document: {exc!r}") from None
    return TopologyGraph(m, offsets, vertices, tuple(edges))


def _node_name(q: QubitCoordinate) -> str:
    return "q{}_{}_{}_{}".format(*q)


_DOT_STYLE = {INTERNAL: "solid", EXTERNAL: "dashed", ODD: "bold"}


def export_graph(g: TopologyGraph, fmt: str = "json") -> bytes:
    """Serialize a graph as canonical ``json``, ``dot`` or ``edgelist`` bytes."""
    if fmt == "json":
        return (json.dumps(to_dict(g), separators=(",", ":")) + "\n").encode()
    if fmt == "edgelist":
        lines = [
            "{} {} {}".format(" ".join(map(str, e.a)), " ".join(map(str, e.b)), e.kind)
            for e in g.edges
        ]
        return ("\n".join(lines) + "\n").encode() if lines else b""
    if fmt == "dot":
        out = [f"graph topology_m{g.m} {{"]
        for v in g.vertices:
            out.append(f'  {_node_name(v)} [label="{",".join(map(str, v))}"];')
        for e in g.edges:
            out.append(
                f"  {_node_name(e.a)} -- {_node_name(e.b)} "
                f'[kind="{e.kind}", style="{_DOT_STYLE[e.kind]}"];'
            )
        out.append("}")
        return ("\n".join(out) + "\n").encode()
    raise TopologyError(f"unknown export format {fmt!r}")


def import_graph(data: bytes | str) -> TopologyGraph:
    if isinstance(data, bytes):
        data = data.decode()
    return from_dict(json.loads(data))


def summary(g: TopologyGraph) -> dict:
    hist = degree_histogram(g)
    return {
        "m": g.m,
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "kinds": g.kind_counts(),
        "max_degree": max(hist) if hist else 0,
    }


def vertex_count(m: int) -> int:
    return 2 * TRACKS_PER_TILE * m * (m - 1)

