"""Quantum-critical-point energy scale and the transverse-field Ising chain.

Energies are held in joules internally. Schedules tabulated in GHz are
converted with Planck's constant when loaded.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import eigsh

K_B = constants.Boltzmann
H_PLANCK = constants.Planck
GHZ_TO_J = H_PLANCK * 1e9

MIN_SITES, MAX_SITES = 2, 14
DENSE_LIMIT = 256  # sector dimension above which Lanczos replaces dense eigh


class EnergyScaleError(ValueError):
    pass


@dataclass(frozen=True)
class AnnealSchedule:
    s: np.ndarray
    A: np.ndarray
    B: np.ndarray
    units: str = "J"

    def __post_init__(self):
        s, A, B = (np.asarray(v, dtype=float) for v in (self.s, self.A, self.B))
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.units not in ("J", "GHz"):
            raise EnergyScaleError(f"units must be 'J' or 'GHz', got {self.units!r}")
        if s.ndim != 1 or s.size < 2 or A.shape != s.shape or B.shape != s.shape:
            raise EnergyScaleError("schedule needs matching 1-D s, A, B arrays of length >= 2")
        if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
            raise EnergyScaleError("s grid must increase strictly from 0 to 1")
        if np.any(np.diff(A) > 0):
            raise EnergyScaleError("A(s) must be nonincreasing")
        if np.any(np.diff(B) < 0):
            raise EnergyScaleError("B(s) must be nondecreasing")

    @classmethod
    def from_functions(cls, A, B, points: int = 1001, units: str = "J") -> "AnnealSchedule":
        s = np.linspace(0.0, 1.0, points)
        return cls(s, A(s), B(s), units)

    def scaled(self, factor: float) -> "AnnealSchedule":
        return AnnealSchedule(self.s, self.A * factor, self.B * factor, self.units)

    def in_joules(self) -> "AnnealSchedule":
        if self.units == "J":
            return self
        return AnnealSchedule(self.s, self.A * GHZ_TO_J, self.B * GHZ_TO_J, "J")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# units={self.units}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "A", "B"])
        for row in zip(self.s, self.A, self.B):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AnnealSchedule":
        units = "J"
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta = line.lstrip("#").strip()
                if meta.startswith("units="):
                    units = meta.split("=", 1)[1].strip()
                continue
            rows.append(line)
        reader = csv.DictReader(rows)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["s", "A", "B"]:
            raise EnergyScaleError("schedule CSV header must be 's,A,B'")
        try:
            data = [(float(r["s"]), float(r["A"]), float(r["B"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise EnergyScaleError(f"bad schedule row: {exc}") from None
        if not data:
            raise EnergyScaleError("schedule CSV has no rows")
        s, A, B = zip(*data)
        return cls(np.array(s), np.array(A), np.array(B), units)


def synthetic_schedule(A0: float = 1.0, B0: float = 1.0, points: int = 1001,
                       units: str = "J") -> AnnealSchedule:
    """Demo schedule ``A = A0 (1-s)^2``, ``B = B0 s^2``; not a device schedule."""
    return AnnealSchedule.from_functions(
        lambda s: A0 * (1 - s) ** 2, lambda s: B0 * s**2, points, units
    )


@dataclass(frozen=True)
class QcpResult:
    s_star: float
    E_QCP: float
    units: str
    temperature_K: float | None
    thermal_ratio: float | None
    iterations: int

    def to_dict(self) -> dict:
        return {
            "s_star": self.s_star,
            "E_QCP": self.E_QCP,
            "units": self.units,
            "temperature_K": self.temperature_K,
            "thermal_ratio": self.thermal_ratio,
        }


def qcp_find(sched: AnnealSchedule, temperature: float | None = None,
             tol: float = 1e-12, s_tol: float = 1e-15, max_iter: int = 200) -> QcpResult:
    """Locate ``s*`` where ``A(s*) = B(s*)`` by bisection on the interpolated difference.

    Stops once ``|A - B| <= tol`` or the bracket is narrower than ``s_tol``.
    The thermal ratio ``E_QCP / (k_B T)`` is reported when a temperature is given.
    """
    if not tol > 0:
        raise EnergyScaleError(f"tol must be > 0, got {tol}")
    s, diff = sched.s, sched.A - sched.B

    def d(x: float) -> float:
        return float(np.interp(x, s, diff))

    lo, hi = 0.0, 1.0
    d_lo, d_hi = d(lo), d(hi)
    if not (d_lo > 0 and d_hi < 0):
        raise EnergyScaleError(
            f"A - B must change sign on [0, 1]; got A-B={d_lo:.6g} at s=0 and {d_hi:.6g} at s=1"
        )
    mid, it = 0.5, 0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        d_mid = d(mid)
        if abs(d_mid) <= tol or hi - lo <= s_tol:
            break
        if d_mid > 0:
            lo = mid
        else:
            hi = mid
    residual = d(mid)
    if abs(residual) > tol:
        raise EnergyScaleError(f"bisection stalled with |A-B|={abs(residual):.3g} > tol={tol}")
    energy = 0.5 * (float(np.interp(mid, s, sched.A)) + float(np.interp(mid, s, sched.B)))
    ratio = None
    if temperature is not None:
        if not temperature > 0:
            raise EnergyScaleError(f"temperature must be > 0 K, got {temperature}")
        joules = energy * GHZ_TO_J if sched.units == "GHz" else energy
        ratio = joules / (K_B * temperature)
    return QcpResult(mid, energy, sched.units, temperature, ratio, it)


def b_from_persistent_current(m_afm: float, ip, to_ghz: bool = False) -> np.ndarray:
    """Coupling energy ``M_AFM * Ip(s)**2`` in joules (or GHz)."""
    ip = np.asarray(ip, dtype=float)
    if ip.size == 0:
        raise EnergyScaleError("persistent-current grid is empty")
    if not m_afm > 0 or np.any(ip <= 0):
        raise EnergyScaleError("M_AFM and persistent currents must be positive")
    B = m_afm * ip**2
    return B / GHZ_TO_J if to_ghz else B


# -- transverse-field Ising chain ---------------------------------------------
#
# H = -a sum_i X_i + b * sign * sum_<ij> Z_i Z_j  with sign -1 (ferro) or +1.
# In the X eigenbasis the field is diagonal and each ZZ bond flips two
# neighbouring spins, so H is block diagonal in the parity of the number of
# flipped spins. Each parity sector is diagonalized on its own.


@dataclass(frozen=True)
class ChainSpectrum:
    n: int
    E0: float
    E1: float
    gap: float  # E1 - E0 over the full spectrum
    sector_gap: float  # first excitation inside the ground state's parity sector
    even: tuple[float, ...]  # lowest eigenvalues of the even sector
    odd: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"n": self.n, "E0": self.E0, "E1": self.E1, "gap": self.gap,
                "sector_gap": self.sector_gap}


def _check_chain(n: int, a: float, b: float, coupling_sign: str, boundary: str) -> None:
    if not MIN_SITES <= n <= MAX_SITES:
        raise EnergyScaleError(f"n={n} outside supported range [{MIN_SITES}, {MAX_SITES}]")
    if a < 0 or b < 0:
        raise EnergyScaleError("a and b must be nonnegative")
    if coupling_sign not in ("ferro", "antiferro"):
        raise EnergyScaleError(f"coupling_sign must be ferro or antiferro, got {coupling_sign!r}")
    if boundary not in ("open", "periodic"):
        raise EnergyScaleError(f"boundary must be open or periodic, got {boundary!r}")


def _bonds(n: int, boundary: str) -> list[tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(n - 1)]
    if boundary == "periodic" and n > 2:
        bonds.append((n - 1, 0))
    return bonds


def sector_hamiltonian(n: int, a: float, b: float, coupling_sign: str,
                       boundary: str, parity: int) -> csr_matrix:
    """Sparse Hamiltonian restricted to one parity sector (X eigenbasis)."""
    states = np.arange(1 << n, dtype=np.int64)
    flips = np.zeros(states.size, dtype=np.int64)
    for i in range(n):
        flips += (states >> i) & 1
    basis = states[flips % 2 == parity]
    dim = basis.size
    index = np.full(states.size, -1, dtype=np.int64)
    index[basis] = np.arange(dim)
    sign = -1.0 if coupling_sign == "ferro" else 1.0

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [-a * (n - 2.0 * flips[basis])]
    for i, j in _bonds(n, boundary):
        rows.append(np.arange(dim))
        cols.append(index[basis ^ ((1 << i) | (1 << j))])
        vals.append(np.full(dim, b * sign))
    return csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def _lowest(h: csr_matrix, k: int) -> np.ndarray:
    dim = h.shape[0]
    k = min(k, dim)
    if dim <= DENSE_LIMIT:
        return np.linalg.eigvalsh(h.toarray())[:k]
    vals = eigsh(h, k=k, which="SA", tol=1e-13, v0=np.ones(dim), return_eigenvectors=False)
    return np.sort(vals)


def tfim_chain_spectrum(n: int, a: float, b: float, coupling_sign: str = "ferro",
                        boundary: str = "open", levels: int = 3) -> ChainSpectrum:
    _check_chain(n, a, b, coupling_sign, boundary)
    even = _lowest(sector_hamiltonian(n, a, b, coupling_sign, boundary, 0), levels)
    odd = _lowest(sector_hamiltonian(n, a, b, coupling_sign, boundary, 1), levels)
    merged = np.sort(np.concatenate([even, odd]))
    E0, E1 = float(merged[0]), float(merged[1])
    home = even if even[0] <= odd[0] else odd
    sector_gap = float(home[1] - home[0]) if home.size > 1 else math.inf
    return ChainSpectrum(
        n, E0, E1, max(E1 - E0, 0.0), max(sector_gap, 0.0),
        tuple(float(v) for v in even), tuple(float(v) for v in odd),
    )


def full_hamiltonian(n: int, a: float, b: float, coupling_sign: str = "ferro",
                     boundary: str = "open") -> np.ndarray:
    """Dense 2^n x 2^n Hamiltonian built from Kronecker products in the Z basis."""
    _check_chain(n, a, b, coupling_sign, boundary)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.diag([1.0, -1.0])

    def op(single: dict[int, np.ndarray]) -> np.ndarray:
        out = np.ones((1, 1))
        for site in range(n):
            out = np.kron(out, single.get(site, np.eye(2)))
        return out

    sign = -1.0 if coupling_sign == "ferro" else 1.0
    H = np.zeros((1 << n, 1 << n))
    for i in range(n):
        H -= a * op({i: sx})
    for i, j in _bonds(n, boundary):
        H += b * sign * op({i: sz, j: sz})
    return H


def gap_at(n: int, ratio: float, boundary: str = "periodic") -> float:
    """Ground-sector gap of the ferromagnetic chain at ``b/a = ratio``, ``a = 1``."""
    return tfim_chain_spectrum(n, 1.0, ratio, "ferro", boundary, levels=2).sector_gap


def golden_section_min(f, lo: float, hi: float, xtol: float = 1e-4) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PseudoCritical:
    n: int
    r_star: float
    gap: float
    boundary: str
    scan: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {"n": self.n, "r_star": self.r_star, "gap": self.gap, "boundary": self.boundary}


def pseudo_critical_point(n: int, resolution: float = 1e-2, boundary: str = "periodic",
                          xtol: float = 1e-4, r_max: float = 2.0) -> PseudoCritical:
    """Coupling ratio ``b/a`` minimizing the ground-sector gap of an ``n``-site chain.

    The gap is measured inside the parity sector of the ground state: the
    cross-sector gap closes exponentially throughout the ordered phase, so
    its minimum would sit at the edge of any scan window. A coarse scan over
    ``(0, r_max]`` is refined by golden-section search.
    """
    _check_chain(n, 1.0, 1.0, "ferro", boundary)
    if not 0 < resolution < r_max:
        raise EnergyScaleError(f"resolution must lie in (0, {r_max}), got {resolution}")
    grid = np.arange(1, int(round(r_max / resolution)) + 1) * resolution
    scan = tuple((float(r), gap_at(n, float(r), boundary)) for r in grid)
    i = min(range(len(scan)), key=lambda j: scan[j][1])
    lo = scan[i - 1][0] if i > 0 else max(scan[i][0] - resolution, 1e-9)
    hi = scan[i + 1][0] if i + 1 < len(scan) else scan[i][0]
    r_star = golden_section_min(lambda r: gap_at(n, r, boundary), lo, hi, xtol)
    return PseudoCritical(n, r_star, gap_at(n, r_star, boundary), boundary, scan)
