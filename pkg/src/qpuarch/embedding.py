"""Chain-embedding validation and chain statistics on a :class:`TopologyGraph`."""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Mapping

from .topology import QubitCoordinate, TopologyGraph, find_triangle


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class IsingProblem:
    """Sparse Ising problem: linear biases ``h`` and pairwise couplings ``J``."""

    h: tuple[float, ...]
    J: dict = field(default_factory=dict)  # (i, j) with i < j -> value

    def __post_init__(self):
        n = len(self.h)
        canon: dict[tuple[int, int], float] = {}
        for (i, j), value in self.J.items():
            i, j = int(i), int(j)
            if i == j:
                raise EmbeddingError(f"J has a diagonal entry ({i}, {i})")
            if not (0 <= i < n and 0 <= j < n):
                raise EmbeddingError(f"J index ({i}, {j}) outside [0, {n})")
            key = (min(i, j), max(i, j))
            canon[key] = canon.get(key, 0.0) + float(value)
        object.__setattr__(self, "h", tuple(float(v) for v in self.h))
        object.__setattr__(self, "J", dict(sorted(canon.items())))

    @property
    def num_variables(self) -> int:
        return len(self.h)

    def to_dict(self) -> dict:
        return {"h": list(self.h), "J": [[i, j, v] for (i, j), v in self.J.items()]}

    @classmethod
    def from_dict(cls, data: dict) -> "IsingProblem":
        try:
            J = {(int(i), int(j)): float(v) for i, j, v in data.get("J", [])}
            return cls(tuple(data["h"]), J)
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed problem document: {exc}") from None


Embedding = Mapping[int, frozenset[QubitCoordinate]]


def embedding_from_dict(data: dict) -> dict[int, frozenset[QubitCoordinate]]:
    try:
        emb = {
            int(var): frozenset(QubitCoordinate(*map(int, q)) for q in chain)
            for var, chain in data.items()
        }
    except (TypeError, ValueError) as exc:
        raise EmbeddingError(f"malformed embedding document: {exc}") from None
    for var, chain in emb.items():
        if not chain:
            raise EmbeddingError(f"chain for variable {var} is empty")
    return dict(sorted(emb.items()))


def embedding_to_dict(e: Embedding) -> dict:
    return {str(var): [list(q) for q in sorted(e[var])] for var in sorted(e)}


def _connected(g: TopologyGraph, chain: frozenset[QubitCoordinate]) -> bool:
    start = min(chain)
    seen = {start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for nb in g.neighbors(q):
            if nb in chain and nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == len(chain)


def validate_embedding(g: TopologyGraph, p: IsingProblem, e: Embedding) -> list[dict]:
    """Collect every defect of an embedding.

    Returns a list of violation records, each a dict with a ``type`` key
    (``missing_chain``, ``absent_qubit``, ``overlap``, ``disconnected_chain``
    or ``missing_coupler``) plus the variables and qubits involved. An empty
    list means the embedding is valid.
    """
    violations: list[dict] = []
    vertex_set = set(g.vertices)

    for var in range(p.num_variables):
        if var not in e or not e[var]:
            violations.append({"type": "missing_chain", "variables": [var]})

    for var in sorted(e):
        absent = sorted(q for q in e[var] if q not in vertex_set)
        if absent:
            violations.append(
                {"type": "absent_qubit", "variables": [var], "qubits": [list(q) for q in absent]}
            )

    owner: dict[QubitCoordinate, int] = {}
    for var in sorted(e):
        for q in sorted(e[var]):
            if q in owner:
                violations.append(
                    {"type": "overlap", "variables": [owner[q], var], "qubits": [list(q)]}
                )
            else:
                owner[q] = var

    for var in sorted(e):
        chain = frozenset(q for q in e[var] if q in vertex_set)
        if len(chain) > 1 and not _connected(g, chain):
            violations.append({"type": "disconnected_chain", "variables": [var]})

    for (i, j), value in p.J.items():
        if value == 0 or i not in e or j not in e:
            continue
        chain_j = e[j]
        if not any(nb in chain_j for q in e[i] for nb in g.neighbors(q)):
            violations.append({"type": "missing_coupler", "variables": [i, j]})
    return violations


@dataclass(frozen=True)
class ChainStats:
    max_length: int
    mean_length: float
    histogram: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "max_length": self.max_length,
            "mean_length": self.mean_length,
            "histogram": {str(k): v for k, v in self.histogram.items()},
        }


def chain_statistics(e: Embedding) -> ChainStats:
    lengths = [len(chain) for chain in e.values()]
    if not lengths:
        return ChainStats(0, 0.0, {})
    return ChainStats(
        max(lengths), sum(lengths) / len(lengths), dict(sorted(Counter(lengths).items()))
    )


def logical_energy_scale(chain_length: int, physical_scale: float) -> float:
    """Energy scale of a logical qubit made of a uniform chain.

    Declared model: the physical scale divided by the chain length. This is a
    reporting heuristic for the decline of logical energy scale with chain
    length, not a device-physics result.
    """
    if chain_length < 1:
        raise EmbeddingError(f"chain_length must be >= 1, got {chain_length}")
    if not physical_scale > 0:
        raise EmbeddingError(f"physical_scale must be > 0, got {physical_scale}")
    return physical_scale / chain_length


def embedding_report(
    g: TopologyGraph, p: IsingProblem, e: Embedding, physical_scale: float = 1.0
) -> dict:
    violations = validate_embedding(g, p, e)
    return {
        "valid": not violations,
        "violations": violations,
        "chain_stats": chain_statistics(e).to_dict(),
        "scales": [
            {"variable": var, "chain_length": len(e[var]),
             "scale": logical_energy_scale(len(e[var]), physical_scale)}
            for var in sorted(e)
            if e[var]
        ],
    }


def singleton_triangle_embedding(g: TopologyGraph):
    """A K3 problem and an all-singleton embedding of it on a native 3-cycle."""
    tri = find_triangle(g)
    if tri is None:
        raise EmbeddingError("graph has no 3-cycle")
    problem = IsingProblem((0.0, 0.0, 0.0), {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
    return problem, {i: frozenset([q]) for i, q in enumerate(tri)}


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
