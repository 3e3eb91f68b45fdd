"""Quantization error of a multi-stage flux DAC.

A DAC of ``k`` cascaded stages with ``levels`` settings each is modelled as an
ideal radix cascade: ``levels**k`` codes uniformly spaced over the closed
full-scale interval ``[lo, hi]``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np


class QuantizationError(ValueError):
    pass


@dataclass(frozen=True)
class DacSpec:
    stages: int
    levels: int
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.stages < 1:
            raise QuantizationError(f"stage count must be >= 1, got {self.stages}")
        if self.levels < 2:
            raise QuantizationError(f"levels per stage must be >= 2, got {self.levels}")
        if not self.hi > self.lo:
            raise QuantizationError(f"full scale [{self.lo}, {self.hi}] is empty")

    @property
    def codes(self) -> int:
        return self.levels**self.stages

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.codes - 1)

    def value(self, code):
        return self.lo + code * self.step


# Model defaults: previous generation 2 stages, current 4 stages, 8 levels each.
OLD_DEFAULT = DacSpec(stages=2, levels=8)
NEW_DEFAULT = DacSpec(stages=4, levels=8)


class Quantized(NamedTuple):
    code: int
    value: float
    error: float
    clamped: bool


def _codes_for(targets: np.ndarray, spec: DacSpec) -> np.ndarray:
    # nearest code, exact midpoints resolve to the lower code
    t = (targets - spec.lo) / spec.step
    codes = np.ceil(t - 0.5).astype(np.int64)
    return np.clip(codes, 0, spec.codes - 1)


def quantize(target: float, spec: DacSpec) -> Quantized:
    clamped = not spec.lo <= target <= spec.hi
    t = min(max(float(target), spec.lo), spec.hi)
    code = int(_codes_for(np.array([t]), spec)[0])
    value = float(spec.value(code))
    return Quantized(code, value, value - float(target), clamped)


def quantize_array(targets, spec: DacSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`quantize`; returns ``(values, errors)``.

    Out-of-range targets are clamped, so their errors include the clamp.
    """
    targets = np.asarray(targets, dtype=float)
    codes = _codes_for(np.clip(targets, spec.lo, spec.hi), spec)
    values = spec.value(codes.astype(float))
    return values, values - targets


@dataclass(frozen=True)
class QuantizationReport:
    max_abs_error: float
    mean_abs_error: float
    rms_error: float
    samples: int
    sampling: str
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    spec: DacSpec

    def to_dict(self) -> dict:
        return {
            "max_abs_error": self.max_abs_error,
            "mean_abs_error": self.mean_abs_error,
            "rms_error": self.rms_error,
            "samples": self.samples,
            "sampling": self.sampling,
            "step": self.spec.step,
            "spec": asdict(self.spec) | {"codes": self.spec.codes},
            "histogram": {"edges": list(self.bin_edges), "counts": list(self.counts)},
        }

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(self.bin_edges, self.bin_edges[1:], self.counts):
            w.writerow([repr(lo), repr(hi), c])
        return buf.getvalue()


SAMPLINGS = ("grid", "exhaustive-midpoints", "random")


def sample_positions(spec: DacSpec, sampling: str, samples: int = 100_001, seed: int = 0):
    """Sample targets in code units, i.e. ``(target - lo) / step``.

    Working in code units keeps code midpoints exact (``c + 0.5``), so the
    lower-code tie-break and the worst case ``step / 2`` are hit exactly.
    """
    top = spec.codes - 1
    if sampling == "exhaustive-midpoints":
        return np.arange(top) + 0.5
    if sampling == "grid":
        return np.linspace(0.0, top, samples)
    if sampling == "random":
        return np.random.default_rng(seed).uniform(0.0, top, samples)
    raise QuantizationError(f"unknown sampling mode {sampling!r}; choose from {SAMPLINGS}")


def error_report(
    spec: DacSpec,
    sampling: str = "exhaustive-midpoints",
    samples: int = 100_001,
    bins: int = 21,
    seed: int = 0,
) -> QuantizationReport:
    """Error statistics over a set of in-range targets.

    ``exhaustive-midpoints`` evaluates the midpoint between every adjacent
    pair of codes, where the error magnitude peaks, so its maximum is the
    exact worst case ``step / 2``.
    """
    positions = sample_positions(spec, sampling, samples, seed)
    errors = (np.ceil(positions - 0.5) - positions) * spec.step
    abs_err = np.abs(errors)
    half = spec.step / 2
    lo_edge, hi_edge = min(-half, float(errors.min())), max(half, float(errors.max()))
    counts, edges = np.histogram(errors, bins=bins, range=(lo_edge, hi_edge))
    return QuantizationReport(
        max_abs_error=float(abs_err.max()),
        mean_abs_error=float(abs_err.mean()),
        rms_error=float(math.sqrt(np.mean(errors**2))),
        samples=int(positions.size),
        sampling=sampling,
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        spec=spec,
    )


def compare_specs(old: DacSpec, new: DacSpec) -> float:
    """Ratio of worst-case quantization errors, old over new (> 1 is an improvement)."""
    if (old.lo, old.hi) != (new.lo, new.hi):
        raise QuantizationError(
            f"full scales differ: [{old.lo}, {old.hi}] vs [{new.lo}, {new.hi}]"
        )
    return error_report(old).max_abs_error / error_report(new).max_abs_error


@dataclass(frozen=True)
class SpecificationError:
    dh: tuple[float, ...]
    dJ: dict
    clamped_h: int
    clamped_J: int

    @property
    def max_dh(self) -> float:
        return max((abs(v) for v in self.dh), default=0.0)

    @property
    def max_dJ(self) -> float:
        return max((abs(v) for v in self.dJ.values()), default=0.0)

    def to_dict(self) -> dict:
        return {
            "max_abs_dh": self.max_dh,
            "max_abs_dJ": self.max_dJ,
            "clamped_h": self.clamped_h,
            "clamped_J": self.clamped_J,
            "dh": list(self.dh),
            "dJ": [[i, j, v] for (i, j), v in self.dJ.items()],
        }


def hamiltonian_specification_error(problem, spec_h: DacSpec = NEW_DEFAULT,
                                    spec_J: DacSpec = NEW_DEFAULT) -> SpecificationError:
    h = np.asarray(problem.h, dtype=float)
    keys = list(problem.J)
    J = np.asarray([problem.J[key] for key in keys], dtype=float)
    _, dh = quantize_array(h, spec_h)
    _, dJ = quantize_array(J, spec_J)
    return SpecificationError(
        dh=tuple(float(v) for v in dh),
        dJ={key: float(v) for key, v in zip(keys, dJ)},
        clamped_h=int(np.sum((h < spec_h.lo) | (h > spec_h.hi))),
        clamped_J=int(np.sum((J < spec_J.lo) | (J > spec_J.hi))),
    )
