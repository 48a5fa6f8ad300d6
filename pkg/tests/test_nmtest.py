import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extractorlab.cli import ext_sweep
from extractorlab.dist import WeakSourceSpec, enum_flat_sources
from extractorlab.nmtest import (
    NM_NOTE,
    RegimeError,
    TamperStrategy,
    enum_tamper,
    nm_bruteforce,
    sample_two_source,
    two_source_slow,
)
from extractorlab.nmtest import test_nm as run_nm
from extractorlab.nmtest import test_two_source as two_source
from extractorlab.xtr import NmExtParams, TwoWiseSpec, nm_error_bound

F = Fraction
UY3 = WeakSourceSpec(3, math.log2(3))
UY9 = WeakSourceSpec(9, math.log2(9))
UX9 = WeakSourceSpec(9, math.log2(9))


def oracle_nm_error(table, px, py, p=3):
    """Definition-level error for one table at p=3, n=2 (Y in F_3, so y^2 = y*y mod 3)."""
    joint, side = {}, {}
    for (x0, x1), wx in px.items():
        for y, wy in py.items():
            y2 = table[y]
            z = (x0 * y + x1 * y * y) % p
            z2 = (x0 * y2 + x1 * y2 * y2) % p
            joint[(z, z2, y, y2)] = joint.get((z, z2, y, y2), 0) + wx * wy
            side[(z2, y, y2)] = side.get((z2, y, y2), 0) + wx * wy
    total = F(0)
    for (z2, y, y2), w in side.items():
        for z in range(p):
            total += abs(joint.get((z, z2, y, y2), 0) - w / p)
    return total / 2


class TestTwoSource:
    def test_half_support_example(self):
        x = WeakSourceSpec.flat(3, (1, 2))
        assert two_source(TwoWiseSpec.ip(3, 1), x, UY3, "Y") == F(4, 9)

    def test_uniform_within_bound(self):
        eps = two_source(TwoWiseSpec.ip(3, 2), UX9, UY9, "Y")
        assert eps <= math.sqrt(3 * 2 ** -math.log2(9))
        # only y = 0 (mass 1/9) is biased: Z = 0 there, slice distance 2/3
        assert eps == F(2, 27)

    def test_point_mass(self):
        x = WeakSourceSpec.flat(3, (1,))
        ext = TwoWiseSpec.ip(3, 1)
        # Z = Y itself: uniform on its own, fully determined once Y is revealed
        assert two_source(ext, x, UY3, "none") == 0
        assert two_source(ext, x, UY3, "Y") == F(2, 3)

    @pytest.mark.parametrize("strong", ["Y", "X", "none"])
    @pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1)])
    def test_fast_matches_slow(self, strong, p, n):
        ext = TwoWiseSpec.ip(p, n)
        size = p**n
        for s in (1, 2, size):
            for src in enum_flat_sources(None, s, budget=6, seed=1, size=size):
                y = WeakSourceSpec.flat(size, range(0, size, 2))
                assert two_source(ext, src, y, strong) == two_source_slow(ext, src, y, strong)

    def test_regime_error(self):
        big = TwoWiseSpec.ip(67108879, 1)
        src = WeakSourceSpec(67108879, 26)
        with pytest.raises(RegimeError):
            two_source(big, src, src, "Y")

    def test_sampled_close_to_exact(self):
        ext = TwoWiseSpec.ip(3, 2)
        x = WeakSourceSpec.flat(9, (1, 2, 4, 5))
        exact = float(two_source(ext, x, UY9, "Y"))
        est = sample_two_source(ext, x, UY9, samples=200000, seed=3)
        assert abs(est - exact) < 0.02


def test_ext_sweep_bound_and_monotonicity():
    rows = ext_sweep(3, 2)
    assert [r["support"] for r in rows] == list(range(2, 10))
    for r in rows:
        assert float(r["epsilon"]) <= math.sqrt(3 * 2 ** -math.log2(r["support"])) + 1e-12
    eps = [F(r["epsilon_exact"]) for r in rows]
    assert all(b <= a for a, b in zip(eps, eps[1:]))


class TestTamper:
    def test_counts(self):
        assert [t.table for t in enum_tamper(2)] == [(1, 0)]
        assert len(list(enum_tamper(3))) == 8
        assert len(list(enum_tamper(4))) == 81

    def test_no_fixed_points(self):
        for t in enum_tamper(4):
            assert all(t.table[y] != y for y in range(4))
        with pytest.raises(ValueError):
            TamperStrategy((0, 0, 1))

    def test_no_mass_on_diagonal(self):
        for t in enum_tamper(3):
            mass = {}
            for y in range(3):
                mass[(y, t.table[y])] = mass.get((y, t.table[y]), 0) + F(1, 3)
            assert sum(v for (y, y2), v in mass.items() if y == y2) == 0


class TestNm:
    params = NmExtParams(3, 2)

    def test_uniform_under_bound(self):
        rep = run_nm(self.params, UX9, UY3)
        assert rep.tables_checked == 8
        assert rep.epsilon == F(2, 9)
        assert rep.in_force and rep.holds
        assert rep.bound == pytest.approx(nm_error_bound(3, 2, math.log2(9), math.log2(3)))
        assert rep.bound == pytest.approx(2 ** -1.3342, abs=1e-3)
        assert rep.worst_table == (1, 0, 0)
        assert rep.note == NM_NOTE

    def test_point_mass(self):
        x = WeakSourceSpec.flat(9, (4,))
        assert run_nm(self.params, x, UY3).epsilon == F(2, 3)

    def test_matches_definition_oracle(self):
        px = {(a, b): F(1, 9) for a in range(3) for b in range(3)}
        py = {y: F(1, 3) for y in range(3)}
        worst = max(oracle_nm_error(t.table, px, py) for t in enum_tamper(3))
        assert worst == F(2, 9)

    @pytest.mark.parametrize("subset", [(0,), (1, 5), (0, 3, 7), (2, 4, 6, 8), tuple(range(9))])
    def test_fast_matches_bruteforce(self, subset):
        x = WeakSourceSpec.flat(9, subset)
        fast, slow = run_nm(self.params, x, UY3), nm_bruteforce(self.params, x, UY3)
        assert fast.epsilon == slow.epsilon
        assert fast.worst_table == slow.worst_table

    def test_low_entropy_not_in_force(self):
        rep = run_nm(self.params, WeakSourceSpec.flat(9, (0, 1)), UY3)
        assert not rep.in_force

    def test_sampled_mode(self):
        params = NmExtParams(3, 4)
        x = WeakSourceSpec(81, math.log2(81))
        rep = run_nm(params, x, UY9, strategies="sampled", samples=64, seed=2)
        assert rep.mode == "sampled" and rep.tables_checked == 64
        assert rep.epsilon <= run_nm(params, x, UY9).epsilon

    def test_bruteforce_regime(self):
        with pytest.raises(RegimeError):
            nm_bruteforce(NmExtParams(5, 4), WeakSourceSpec(625, math.log2(625)), WeakSourceSpec(25, math.log2(25)))

    def test_report_csv(self):
        row = run_nm(self.params, UX9, UY3).csv_row()
        assert row["in_force"] == 1 and row["epsilon_exact"] == "2/9"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nm_fast_matches_bruteforce_random_weights(seed):
    rng = np.random.default_rng(seed)
    params = NmExtParams(3, 2)
    sx = WeakSourceSpec.flat(9, sorted(rng.choice(9, size=int(rng.integers(1, 10)), replace=False).tolist()))
    sy = WeakSourceSpec.flat(3, sorted(rng.choice(3, size=int(rng.integers(1, 4)), replace=False).tolist()))
    assert run_nm(params, sx, sy).epsilon == nm_bruteforce(params, sx, sy).epsilon


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_source_double_enumeration(seed):
    rng = np.random.default_rng(seed)
    ext = TwoWiseSpec.ip(3, 2)
    sx = WeakSourceSpec.flat(9, sorted(rng.choice(9, size=int(rng.integers(1, 10)), replace=False).tolist()))
    sy = WeakSourceSpec.flat(9, sorted(rng.choice(9, size=int(rng.integers(1, 10)), replace=False).tolist()))
    assert abs(float(two_source(ext, sx, sy)) - float(two_source_slow(ext, sx, sy))) <= 1e-12
