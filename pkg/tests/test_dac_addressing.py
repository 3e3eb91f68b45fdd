import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpuarch.dac_addressing import (
    OPPOSITE,
    SAME,
    AddressingError,
    AddressingPlan,
    BraidedScheme,
    CapacityError,
    StageAddress,
    XyzScheme,
    capacity_braided,
    capacity_xyz,
    domain_loads,
    dumps,
    fire_set,
    from_dict,
    plan,
    programming_time_estimate,
    suggest_line_count,
    to_dict,
    verify,
)


def all_drives(n, z):
    for d in range(z):
        for a, b in itertools.combinations(range(n), 2):
            for pol in (SAME, OPPOSITE):
                yield StageAddress(d, a, b, pol)


def fires(addr, drive):
    # stage fires iff its domain is powered, both lines driven, polarity matches
    return (addr.domain == drive.domain and {addr.a, addr.b} == {drive.a, drive.b}
            and addr.polarity == drive.polarity)


def uniquely_selectable(p):
    """Stages that some drive fires alone, by exhaustive drive enumeration."""
    unique = set()
    for drive in all_drives(p.scheme.n, p.scheme.z):
        hit = [i for i, a in enumerate(p.assignments) if fires(a, drive)]
        if len(hit) == 1:
            unique.add(hit[0])
    return unique


def half_select_oracle(p, drive):
    same_domain = [a for a in p.assignments if a.domain == drive.domain]
    one_line = [a for a in same_domain if len({a.a, a.b} & {drive.a, drive.b}) == 1]
    return len(one_line), sum(1 for a in one_line if a.polarity == drive.polarity)


class TestCapacity:
    def test_five_lines_twenty_stages(self):
        s = BraidedScheme(5, 1)
        assert capacity_braided(s) == 20
        p = plan(s, 20)
        assert len(uniquely_selectable(p)) == 20

    @pytest.mark.parametrize("x,y,z", list(itertools.product(range(1, 9), repeat=3))[::7])
    def test_xyz_enumeration(self, x, y, z):
        stages = set(itertools.product(range(x), range(y), range(z), (SAME, OPPOSITE)))
        assert capacity_xyz(XyzScheme(x, y, z)) == len(stages) == 2 * x * y * z

    @pytest.mark.parametrize("x", range(1, 9))
    def test_braided_even_identity(self, x):
        n = 2 * x
        enumerated = sum(1 for _ in all_drives(n, 1))
        assert capacity_braided(BraidedScheme(n, 1)) == enumerated == 4 * x * x - 2 * x

    @pytest.mark.parametrize("n", [3, 4, 6, 10])
    def test_braided_beats_matrix_for_same_lines(self, n):
        # best split of n lines into x + y matrix lines
        best_xyz = max(capacity_xyz(XyzScheme(x, n - x, 1)) for x in range(1, n))
        assert capacity_braided(BraidedScheme(n, 1)) >= best_xyz

    @pytest.mark.parametrize("n,z", [(1, 1), (0, 3), (4, 0)])
    def test_invalid_scheme(self, n, z):
        with pytest.raises(AddressingError):
            BraidedScheme(n, z)

    def test_invalid_xyz(self):
        with pytest.raises(AddressingError):
            XyzScheme(0, 1, 1)


class TestPlan:
    @pytest.mark.parametrize("n,z", [(n, z) for n in range(2, 10) for z in range(1, 5)])
    def test_sweep_full_and_partial(self, n, z):
        s = BraidedScheme(n, z)
        cap = capacity_braided(s)
        for count in {0, 1, cap // 2, cap - 1, cap}:
            p = plan(s, count)
            rep = verify(p)
            assert rep["valid"], rep["violations"][:3]
            assert len(uniquely_selectable(p)) == count
            loads = p.domain_counts()
            assert max(loads) - min(loads) <= 1
            assert sum(loads) == count

    def test_capacity_error_reports_deficit(self):
        with pytest.raises(CapacityError) as info:
            plan(BraidedScheme(5, 2), 45)
        assert info.value.deficit == 5
        assert "deficit 5" in str(info.value)

    def test_plan_is_lexicographic(self):
        p = plan(BraidedScheme(4, 1), 5)
        assert [tuple(a) for a in p.assignments] == [
            (0, 0, 1, 0), (0, 0, 1, 1), (0, 0, 2, 0), (0, 0, 2, 1), (0, 0, 3, 0)]

    def test_unknown_layout(self):
        with pytest.raises(AddressingError):
            plan(BraidedScheme(4, 1), 3, layout="spiral")

    def test_domain_loads(self):
        assert domain_loads(BraidedScheme(5, 3), 10) == [4, 3, 3]

    def test_round_trip(self):
        p = plan(BraidedScheme(6, 3), 70)
        q = from_dict(to_dict(p))
        assert q == p
        assert dumps(q) == dumps(p)

    def test_gapped_stage_ids_rejected(self):
        doc = to_dict(plan(BraidedScheme(3, 1), 3))
        doc["assignments"][1]["stage"] = 7
        with pytest.raises(AddressingError):
            from_dict(doc)

    def test_suggest_line_count(self):
        assert suggest_line_count(401_408, 128) == 57
        assert suggest_line_count(20, 1) == 5
        n = suggest_line_count(1000, 3)
        assert n % 2 == 1 and n * (n - 1) * 3 >= 1000


class TestFire:
    def test_n5_census(self):
        p = plan(BraidedScheme(5, 1), 20)
        for drive in all_drives(5, 1):
            res = fire_set(p, drive)
            assert len(res.stages) == 1
            assert (res.half_selected, res.half_selected_same_polarity) == (12, 6)
            assert (res.half_selected, res.half_selected_same_polarity) == half_select_oracle(p, drive)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(2, 8), z=st.integers(1, 3), frac=st.floats(0, 1), data=st.data())
    def test_census_matches_oracle(self, n, z, frac, data):
        s = BraidedScheme(n, z)
        p = plan(s, int(frac * capacity_braided(s)))
        drive = data.draw(st.sampled_from(list(all_drives(n, z))))
        res = fire_set(p, drive)
        assert list(res.stages) == [i for i, a in enumerate(p.assignments) if fires(a, drive)]
        assert (res.half_selected, res.half_selected_same_polarity) == half_select_oracle(p, drive)

    def test_drive_normalized(self):
        p = plan(BraidedScheme(4, 1), 12)
        assert fire_set(p, (0, 3, 1, 1)) == fire_set(p, (0, 1, 3, 1))

    @pytest.mark.parametrize("drive", [(1, 0, 1, 0), (0, 0, 0, 0), (0, 0, 4, 0), (0, 0, 1, 2)])
    def test_drive_out_of_range(self, drive):
        with pytest.raises(AddressingError):
            fire_set(plan(BraidedScheme(4, 1), 12), drive)


class TestVerify:
    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(3, 7), z=st.integers(1, 3), data=st.data())
    def test_duplicate_injection_detected(self, n, z, data):
        s = BraidedScheme(n, z)
        p = plan(s, capacity_braided(s) - 1)
        victim = data.draw(st.integers(0, len(p) - 1))
        source = data.draw(st.integers(0, len(p) - 1).filter(lambda i: i != victim))
        rows = list(p.assignments)
        rows[victim] = rows[source]
        bad = AddressingPlan(s, tuple(rows))
        rep = verify(bad)
        assert not rep["valid"]
        dup = [v for v in rep["violations"] if v["type"] == "not_injective"]
        assert len(dup) == 1
        assert sorted(dup[0]["stages"]) == sorted({victim, source})
        assert len(uniquely_selectable(bad)) == len(p) - 2

    def test_out_of_range_detected(self):
        s = BraidedScheme(3, 1)
        bad = AddressingPlan(s, (StageAddress(0, 0, 1, 0), StageAddress(2, 0, 1, 0)))
        types = [v["type"] for v in verify(bad)["violations"]]
        assert types == ["out_of_range"]

    def test_report_independent_of_domain_order(self):
        s = BraidedScheme(4, 3)
        p = plan(s, 30)
        rows = list(p.assignments)
        rows[0], rows[-1] = rows[-1], rows[0]
        rows[5] = rows[6]
        shuffled = AddressingPlan(s, tuple(rows))
        again = AddressingPlan(s, tuple(rows))
        assert verify(shuffled) == verify(again)
        assert Counter(v["type"] for v in verify(shuffled)["violations"]) == {"not_injective": 1}


class TestProgrammingTime:
    def test_serial_and_parallel(self):
        p = plan(BraidedScheme(5, 4), 70)
        assert programming_time_estimate(p, 1e-6) == pytest.approx(70e-6)
        assert programming_time_estimate(p, 1e-6, domain_parallelism=True) == pytest.approx(18e-6)

    def test_empty_plan(self):
        assert programming_time_estimate(plan(BraidedScheme(3, 1), 0), 1.0) == 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(AddressingError):
            programming_time_estimate(plan(BraidedScheme(3, 1), 2), 0.0)
