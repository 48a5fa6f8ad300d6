import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extractorlab.ff import ExtField, FieldError, PrimeField, FieldVec
from extractorlab.xtr import (
    NmExtParams,
    TrevisanParams,
    TwoWiseSpec,
    build_weak_design,
    ip_ext,
    nm_ext,
    nm_ext_int,
    nm_error_bound,
    one_bit_ext,
    pair_map_injective,
    parity_fold,
    prime_power,
    trevisan_bound,
    trevisan_ext,
    truncate,
    truncation_bias,
    two_source_bound,
    twowise_eval,
)


@pytest.mark.parametrize("x,y,p,want", [((1, 2), (2, 2), 3, 0), ((1, 2), (0, 0), 3, 0), ((1, 1), (1, 1), 5, 2)])
def test_ip_examples(x, y, p, want):
    assert ip_ext(x, y, p) == want


def test_ip_accepts_fieldvec():
    f = PrimeField(3)
    assert ip_ext(FieldVec(f, (1, 2)), FieldVec(f, (2, 2))) == 0


def test_ip_length_mismatch():
    with pytest.raises((ValueError, FieldError)):
        ip_ext((1, 2), (1,), 3)


def test_nmext_examples():
    assert nm_ext((1, 2), 2, NmExtParams(3, 2)) == 1
    assert nm_ext((1, 1, 1, 1), (1, 2), NmExtParams(3, 4)) == 1


@pytest.mark.parametrize("p,n", [(3, 2), (3, 4), (5, 2)])
def test_nmext_zero_x(p, n):
    params = NmExtParams(p, n)
    for yi in range(params.ny):
        assert nm_ext_int(0, yi, params) == 0


def test_nmext_matches_independent_square():
    # y || y^2 with y^2 computed by schoolbook multiplication modulo t^2 + 1
    params = NmExtParams(3, 4)
    for y in itertools.product(range(3), repeat=2):
        a, b = y
        sq = ((a * a - b * b) % 3, (2 * a * b) % 3)
        for x in itertools.product(range(3), repeat=4):
            want = sum(u * v for u, v in zip(x, y + sq)) % 3
            assert nm_ext(x, y, params) == want


def test_nmext_requires_even_n():
    with pytest.raises((ValueError, FieldError)):
        NmExtParams(3, 3)


def test_nmext_linear_in_x():
    params = NmExtParams(3, 2)
    xs = list(itertools.product(range(3), repeat=2))
    for yi in range(params.ny):
        for x1, x2 in itertools.product(xs, repeat=2):
            s = tuple((a + b) % 3 for a, b in zip(x1, x2))
            y = params.field.from_int(yi)
            assert nm_ext(s, y, params) == (nm_ext(x1, y, params) + nm_ext(x2, y, params)) % 3


def test_pair_map_injective_gf9():
    ok, pairs = pair_map_injective(ExtField.canonical(3, 2))
    assert ok and pairs == 36


def test_affine_example_and_ip_delegation():
    aff = TwoWiseSpec.affine(3)
    assert twowise_eval(aff, 2, (2, 1)) == 2
    assert twowise_eval(TwoWiseSpec.ip(3, 2), (1, 2), (2, 2)) == 0


def test_ip31_collision_example():
    c = TwoWiseSpec.ip(3, 1).collision_counts()
    assert c[1, 2] == 1


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1), (5, 2)])
def test_ip_twowise_exhaustive(p, n):
    spec = TwoWiseSpec.ip(p, n)
    c = spec.collision_counts()
    off = c[~np.eye(spec.nx, dtype=bool)]
    assert set(off.tolist()) == {p ** (n - 1)}
    assert spec.is_twowise()


@pytest.mark.parametrize("p", [3, 5])
def test_affine_twowise(p):
    assert TwoWiseSpec.affine(p).is_twowise()


def test_table_family_not_twowise():
    spec = TwoWiseSpec.from_table([[0, 0], [0, 0]], nz=2)
    assert not spec.is_twowise()


def test_twowise_json_round_trip():
    for spec in (TwoWiseSpec.ip(5, 2), TwoWiseSpec.affine(3), TwoWiseSpec.from_table([[0, 1], [1, 0]])):
        back = TwoWiseSpec.from_json(spec.to_json())
        assert np.array_equal(back.full_table(), spec.full_table())


def test_nmext_params_json():
    params = NmExtParams(67108879, 2)
    assert NmExtParams.from_json(params.to_json()) == params


def brute_truncation_bias(p, w):
    counts = [0] * (1 << w)
    for z in range(p):
        counts[z % (1 << w)] += 1
    return sum(abs(Fraction(c, p) - Fraction(1, 1 << w)) for c in counts) / 2


@pytest.mark.parametrize("p,w", [(3, 1), (5, 2), (17, 3), (131, 6), (1031, 2)])
def test_truncation_bias_matches_count(p, w):
    assert truncation_bias(p, w) == brute_truncation_bias(p, w)


def test_truncation_bias_desk32_scale():
    assert truncation_bias(67108879, 18) <= Fraction(1, 2**8)
    assert truncate(0b101101, 3) == 0b101


def test_bounds():
    assert two_source_bound(3, 9, math.log2(9), math.log2(9)) == pytest.approx(math.sqrt(3 / 9))
    assert two_source_bound(3, 9, 0, 0) == 1.0
    assert nm_error_bound(3, 2, 2 * math.log2(3), math.log2(3)) == pytest.approx(2 ** ((3 - 7) * math.log2(3) / 4 + 0.25))


def test_prime_power():
    assert prime_power(9) == (3, 2)
    assert prime_power(8) == (2, 3)
    assert prime_power(6) is None


class TestWeakDesign:
    def test_single_set(self):
        params = build_weak_design(1, 3)
        assert params.l == 1 and len(params.design) == 1

    def test_lines_meet_at_most_once(self):
        params = build_weak_design(3, 3)
        for s, t in itertools.combinations(params.design, 2):
            assert len(set(s) & set(t)) <= 1

    @pytest.mark.parametrize("l,t", [(3, 3), (9, 3), (5, 4), (7, 5)])
    def test_set_sizes_and_ranges(self, l, t):
        params = build_weak_design(l, t)
        q = params.t
        assert all(len(s) == q for s in params.design)
        assert all(0 <= j < params.d for s in params.design for j in s)
        assert params.d == q * q

    def test_advice_and_rho(self):
        params = build_weak_design(9, 3)
        assert params.advice == [0, 1, 2, 6, 7, 8, 12, 13, 14]
        assert params.rho == 2.0

    def test_json_round_trip(self):
        params = build_weak_design(9, 3, n=32)
        assert TrevisanParams.from_json(params.to_json()) == params


class TestTrevisan:
    def test_one_bit_core(self):
        assert one_bit_ext("101", "110") == 1

    def test_zero_input(self):
        params = build_weak_design(3, 3, n=8)
        for seed in range(0, 512, 37):
            assert trevisan_ext("0" * 8, format(seed, "09b"), params) == "000"

    def test_tiny_instance_recomputed(self):
        params = build_weak_design(2, 3, n=3)
        for xv, sv in itertools.product(range(8), range(512)):
            x, s = format(xv, "03b"), format(sv, "09b")
            want = ""
            for i in range(2):
                # line i over F_3 is the constant polynomial i, so it reads seed bits a*3 + i
                bits = [int(s[a * 3 + i]) for a in range(3)]
                want += str(sum(int(x[j]) * bits[j] for j in range(3)) % 2)
            assert trevisan_ext(x, s, params) == want

    def test_parity_fold(self):
        assert parity_fold("101", 3) == "101"
        assert parity_fold("1011", 3) == "001"
        assert parity_fold("11", 3) == "110"

    def test_length_errors(self):
        params = build_weak_design(2, 3, n=4)
        with pytest.raises(ValueError):
            trevisan_ext("101", "0" * 9, params)
        with pytest.raises(ValueError):
            trevisan_ext("1010", "0" * 8, params)

    @pytest.mark.parametrize("n", [3, 6, 8])
    def test_linear_in_x(self, n):
        params = build_weak_design(3, 3, n=n)
        rng = np.random.default_rng(n)
        for seed in rng.integers(0, 512, size=6):
            s = format(int(seed), "09b")
            for a, b in itertools.product(range(1 << n), repeat=2):
                if (a * 7 + b) % 5:
                    continue
                xa, xb, xs = (format(v, f"0{n}b") for v in (a, b, a ^ b))
                ra, rb = trevisan_ext(xa, s, params), trevisan_ext(xb, s, params)
                assert trevisan_ext(xs, s, params) == "".join(str(int(u) ^ int(v)) for u, v in zip(ra, rb))

    def test_bound_disjoint_and_hybrid(self):
        disjoint = build_weak_design(3, 3)
        assert disjoint.disjoint
        assert trevisan_bound(disjoint, 3) == pytest.approx(0.5)
        assert trevisan_bound(disjoint, 0) == 1.0
        overlapping = build_weak_design(9, 3)
        assert not overlapping.disjoint
        assert trevisan_bound(overlapping, 3) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nmext_int_matches_vector_form(seed):
    params = NmExtParams(5, 2)
    rng = np.random.default_rng(seed)
    xi, yi = int(rng.integers(0, 25)), int(rng.integers(0, 5))
    x = tuple(int(d) for d in np.base_repr(xi, 5).zfill(2))
    assert nm_ext_int(xi, yi, params) == nm_ext(x, params.field.from_int(yi), params)
