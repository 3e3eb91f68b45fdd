import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpuarch.energy_scale import (
    GHZ_TO_J,
    K_B,
    AnnealSchedule,
    EnergyScaleError,
    b_from_persistent_current,
    full_hamiltonian,
    gap_at,
    golden_section_min,
    pseudo_critical_point,
    qcp_find,
    synthetic_schedule,
    tfim_chain_spectrum,
)

S_EXACT = math.sqrt(2) / (math.sqrt(2) + math.sqrt(3))


def quadratic_schedule(points=2001):
    return AnnealSchedule.from_functions(lambda s: 2 * (1 - s) ** 2, lambda s: 3 * s**2, points)


def kron_hamiltonian(n, a, b, sign, periodic):
    """Textbook construction: -a sum X_i + sign * b sum Z_i Z_{i+1}, Z basis."""
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    Z = np.array([[1.0, 0.0], [0.0, -1.0]])
    I = np.eye(2)

    def site_op(ops):
        return reduce(np.kron, [ops.get(i, I) for i in range(n)])

    H = -a * sum(site_op({i: X}) for i in range(n))
    bonds = [(i, i + 1) for i in range(n - 1)] + ([(n - 1, 0)] if periodic and n > 2 else [])
    for i, j in bonds:
        H = H + sign * b * site_op({i: Z, j: Z})
    return H


def parity_block(H, n, parity):
    """H restricted to the eigenspace of prod_i X_i with the given eigenvalue."""
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    P = reduce(np.kron, [X] * n)
    w, V = np.linalg.eigh(P)
    basis = V[:, np.isclose(w, parity)]
    return basis.T @ H @ basis


class TestSchedule:
    def test_linear_crossing(self):
        sched = AnnealSchedule.from_functions(lambda s: 1 - s, lambda s: s, 11)
        res = qcp_find(sched)
        assert res.s_star == pytest.approx(0.5, abs=1e-12)
        assert res.E_QCP == pytest.approx(0.5, abs=1e-12)

    def test_quadratic_closed_form(self):
        res = qcp_find(quadratic_schedule())
        assert abs(res.s_star - S_EXACT) < 1e-6
        assert res.E_QCP == pytest.approx(2 * (1 - S_EXACT) ** 2, abs=1e-6)
        assert res.E_QCP == pytest.approx(0.60612, abs=1e-5)

    def test_fine_grid_scan_oracle(self):
        sched = quadratic_schedule()
        s = np.linspace(0, 1, 1_000_001)
        diff = np.interp(s, sched.s, sched.A - sched.B)
        idx = np.flatnonzero(np.diff(np.sign(diff)))[0]
        assert abs(qcp_find(sched).s_star - s[idx]) <= 1e-6

    @pytest.mark.parametrize("factor", [2.0**-80, 0.5, 4.0, 1e-24, 7.3e9])
    def test_scaling_invariance(self, factor):
        sched = quadratic_schedule()
        base = qcp_find(sched, tol=1e-12)
        scaled = qcp_find(sched.scaled(factor), tol=1e-12 * factor)
        assert scaled.s_star == pytest.approx(base.s_star, abs=1e-12)
        assert scaled.E_QCP == pytest.approx(base.E_QCP * factor, rel=1e-9)

    def test_scaling_by_power_of_two_is_exact(self):
        sched = quadratic_schedule()
        assert qcp_find(sched.scaled(8.0), tol=8e-12).s_star == qcp_find(sched).s_star

    def test_iteration_bound(self):
        res = qcp_find(quadratic_schedule(), tol=1e-11, s_tol=1e-12)
        assert res.iterations <= math.ceil(math.log2(1 / 1e-12)) + 1

    def test_residual_within_tol(self):
        sched = quadratic_schedule(101)
        res = qcp_find(sched, tol=1e-9)
        a = np.interp(res.s_star, sched.s, sched.A)
        b = np.interp(res.s_star, sched.s, sched.B)
        assert abs(a - b) <= 1e-9

    def test_no_crossing(self):
        sched = AnnealSchedule.from_functions(lambda s: 0.1 * (1 - s), lambda s: 1 + s, 11)
        with pytest.raises(EnergyScaleError, match="change sign"):
            qcp_find(sched)

    def test_non_monotone_rejected(self):
        s = np.linspace(0, 1, 5)
        with pytest.raises(EnergyScaleError, match="nonincreasing"):
            AnnealSchedule(s, np.array([1, 0.8, 0.9, 0.2, 0]), s)

    def test_bad_grid(self):
        with pytest.raises(EnergyScaleError):
            AnnealSchedule(np.array([0.0, 0.7]), np.array([1.0, 0.0]), np.array([0.0, 1.0]))

    def test_thermal_ratio(self):
        sched = synthetic_schedule(A0=4.0, B0=4.0, units="GHz")
        res = qcp_find(sched, temperature=0.012)
        assert res.E_QCP == pytest.approx(1.0, abs=1e-9)
        assert res.thermal_ratio == pytest.approx(GHZ_TO_J / (K_B * 0.012), rel=1e-9)
        assert res.thermal_ratio > 1

    def test_units_conversion(self):
        ghz = synthetic_schedule(units="GHz")
        assert qcp_find(ghz.in_joules()).E_QCP == pytest.approx(qcp_find(ghz).E_QCP * GHZ_TO_J)

    def test_csv_round_trip(self):
        sched = synthetic_schedule(2.0, 3.0, 51, "GHz")
        back = AnnealSchedule.from_csv(sched.to_csv())
        assert back.units == "GHz"
        assert np.array_equal(back.A, sched.A) and np.array_equal(back.s, sched.s)

    def test_csv_bad_header(self):
        with pytest.raises(EnergyScaleError, match="header"):
            AnnealSchedule.from_csv("x,y,z\n0,1,0\n1,0,1\n")


class TestPersistentCurrent:
    def test_worked_example(self):
        assert b_from_persistent_current(2e-12, 1e-6) == pytest.approx(2e-24, rel=1e-12)

    def test_quadratic_law(self):
        ip = np.array([0.5e-6, 1e-6])
        assert np.allclose(b_from_persistent_current(1e-12, 2 * ip),
                           4 * b_from_persistent_current(1e-12, ip))

    def test_ghz(self):
        assert b_from_persistent_current(2e-12, 1e-6, to_ghz=True) == pytest.approx(
            2e-24 / 6.62607015e-34 / 1e9)

    @pytest.mark.parametrize("m,ip", [(2e-12, []), (0.0, [1e-6]), (1e-12, [-1e-6])])
    def test_rejects(self, m, ip):
        with pytest.raises(EnergyScaleError):
            b_from_persistent_current(m, ip)


class TestChainSpectrum:
    @pytest.mark.parametrize("n", range(2, 9))
    @pytest.mark.parametrize("sign", ["ferro", "antiferro"])
    @pytest.mark.parametrize("boundary", ["open", "periodic"])
    def test_matches_dense_oracle(self, n, sign, boundary):
        a, b = 0.7, 1.3
        H = kron_hamiltonian(n, a, b, -1 if sign == "ferro" else 1, boundary == "periodic")
        ref = np.linalg.eigvalsh(H)
        spec = tfim_chain_spectrum(n, a, b, sign, boundary)
        scale = max(abs(ref[0]), 1.0)
        assert abs(spec.E0 - ref[0]) <= 1e-9 * scale
        assert abs(spec.E1 - ref[1]) <= 1e-9 * scale
        for parity, levels in ((1, spec.even), (-1, spec.odd)):
            sector = np.linalg.eigvalsh(parity_block(H, n, parity))[: len(levels)]
            assert np.allclose(levels, sector, rtol=1e-9, atol=1e-9 * scale)

    @pytest.mark.parametrize("n", [3, 6])
    def test_library_kron_agrees(self, n):
        assert np.allclose(full_hamiltonian(n, 0.4, 1.1, "ferro", "periodic"),
                           kron_hamiltonian(n, 0.4, 1.1, -1, True))

    @pytest.mark.parametrize("sign", ["ferro", "antiferro"])
    def test_n2_no_coupling(self, sign):
        assert tfim_chain_spectrum(2, 1.0, 0.0, sign).gap == pytest.approx(2.0)

    @pytest.mark.parametrize("n", [2, 5, 9, 12])
    def test_classical_degenerate(self, n):
        assert tfim_chain_spectrum(n, 0.0, 1.0, "ferro", "open").gap < 1e-10

    @pytest.mark.parametrize("n", range(2, 9))
    def test_antiferro_equals_ferro_open(self, n):
        f = np.linalg.eigvalsh(full_hamiltonian(n, 0.8, 1.2, "ferro"))
        af = np.linalg.eigvalsh(full_hamiltonian(n, 0.8, 1.2, "antiferro"))
        assert np.allclose(f, af, atol=1e-10)
        sf, saf = tfim_chain_spectrum(n, 0.8, 1.2, "ferro"), tfim_chain_spectrum(n, 0.8, 1.2, "antiferro")
        assert sf.E0 == pytest.approx(saf.E0, abs=1e-10)
        assert sf.gap == pytest.approx(saf.gap, abs=1e-10)

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_trace_zero(self, n):
        assert np.sum(np.linalg.eigvalsh(full_hamiltonian(n, 0.9, 1.4))) == pytest.approx(0, abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(a=st.floats(0.1, 2), b=st.floats(0.1, 2), eps=st.floats(-1e-3, 1e-3))
    def test_weyl_continuity(self, a, b, eps):
        n = 6
        g0 = tfim_chain_spectrum(n, a, b).gap
        g1 = tfim_chain_spectrum(n, a + abs(eps), b + abs(eps)).gap
        # both ends of the gap move by at most (n + bonds) * eps
        assert abs(g1 - g0) <= 2 * (2 * n - 1) * abs(eps) + 1e-10

    @pytest.mark.parametrize("n", [13, 14])
    def test_large_chain_sparse_path(self, n):
        spec = tfim_chain_spectrum(n, 1.0, 0.5, boundary="periodic")
        # deep paramagnet: gap close to the single-flip value 2(a - b)
        assert spec.gap == pytest.approx(1.0, abs=0.05)

    @pytest.mark.parametrize("n", [1, 15])
    def test_range(self, n):
        with pytest.raises(EnergyScaleError):
            tfim_chain_spectrum(n, 1.0, 1.0)

    def test_bad_sign(self):
        with pytest.raises(EnergyScaleError):
            tfim_chain_spectrum(4, 1.0, 1.0, "ising")


class TestPseudoCritical:
    def test_golden_section(self):
        assert golden_section_min(lambda x: (x - 0.3) ** 2, 0, 1, 1e-8) == pytest.approx(0.3, abs=1e-7)

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_closed_form_ring(self, n):
        # ring ground-sector gap is smallest at b/a = cos(pi/n)
        res = pseudo_critical_point(n)
        assert res.r_star == pytest.approx(math.cos(math.pi / n), abs=2e-4)
        assert res.gap == pytest.approx(gap_at(n, res.r_star))

    def test_scan_window(self):
        res = pseudo_critical_point(4, resolution=0.1)
        rs = [r for r, _ in res.scan]
        assert rs[0] == pytest.approx(0.1) and rs[-1] == pytest.approx(2.0)

    def test_scan_order_independent(self):
        res = pseudo_critical_point(5, resolution=0.05)
        shuffled = {r: gap_at(5, r) for r, _ in reversed(res.scan)}
        assert all(shuffled[r] == g for r, g in res.scan)

    @pytest.mark.parametrize("resolution", [0.0, 2.5])
    def test_bad_resolution(self, resolution):
        with pytest.raises(EnergyScaleError):
            pseudo_critical_point(4, resolution=resolution)
