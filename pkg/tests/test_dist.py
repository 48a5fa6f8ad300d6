import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extractorlab.dist import (
    Dist,
    RejectionSampler,
    WeakSourceSpec,
    cond_dist,
    enum_flat_sources,
    min_entropy,
    rejection_sample,
    stat_dist,
)

F = Fraction


def brute_cond(joint):
    """Sum over y of |P(z,y) - P(y)/|Z||, halved, from a plain dict."""
    zs = sorted({z for z, _ in joint})
    ys = sorted({y for _, y in joint})
    py = {y: sum(joint.get((z, y), 0) for z in zs) for y in ys}
    return sum(abs(joint.get((z, y), 0) - py[y] / len(zs)) for z in zs for y in ys) / 2


class TestStatDist:
    @pytest.mark.parametrize("p,q,want", [
        (Dist.uniform(range(2)), Dist.uniform(range(2)), 0),
        (Dist.point(0, range(4)), Dist.uniform(range(4)), F(3, 4)),
        (Dist((0, 1), (F(1, 2), F(1, 2))), Dist((0, 1), (F(9, 10), F(1, 10))), F(2, 5)),
    ])
    def test_examples(self, p, q, want):
        assert stat_dist(p, q) == want

    def test_float_example(self):
        assert stat_dist(Dist((0, 1), (0.5, 0.5)), Dist((0, 1), (0.9, 0.1))) == pytest.approx(0.4, abs=1e-15)

    def test_disjoint_points(self):
        assert stat_dist(Dist.point("a", "ab"), Dist.point("b", "ab")) == 1

    def test_misaligned_alphabets_rejected(self):
        with pytest.raises(ValueError):
            stat_dist(Dist.point("a"), Dist.point("b"))


class TestMinEntropy:
    @pytest.mark.parametrize("d,want", [
        (Dist.uniform(range(8)), 3.0),
        (Dist.point(0), 0.0),
        (Dist((0, 1, 2), (F(1, 2), F(1, 4), F(1, 4))), 1.0),
    ])
    def test_examples(self, d, want):
        assert min_entropy(d) == want


class TestCondDist:
    def test_independent_uniform(self):
        joint = Dist.uniform(itertools.product(range(3), range(2)))
        assert cond_dist(joint) == 0

    def test_z_equals_y(self):
        joint = Dist.from_mapping({(0, 0): F(1, 2), (1, 1): F(1, 2)})
        assert cond_dist(joint, (0, 1)) == F(1, 2)

    def test_ip31(self):
        mass = {}
        for x, y in itertools.product(range(3), repeat=2):
            key = ((x * y) % 3, y)
            mass[key] = mass.get(key, 0) + F(1, 9)
        assert cond_dist(Dist.from_mapping(mass), range(3)) == F(2, 9)
        full = {(z, y): mass.get((z, y), F(0)) for z in range(3) for y in range(3)}
        assert brute_cond(full) == F(2, 9)


class TestDistType:
    def test_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            Dist((0, 1), (F(1, 2), F(1, 3)))
        with pytest.raises(ValueError):
            Dist((0, 1), (F(3, 2), F(-1, 2)))

    def test_exactness_regime(self):
        assert Dist.uniform(range(4)).exact
        assert not Dist((0, 1), (0.25, 0.75)).exact

    def test_csv_round_trip(self):
        d = Dist.from_mapping({(0, 1): F(1, 3), "a": F(2, 3)})
        text = d.to_csv()
        assert text.splitlines()[0] == "outcome,probability"
        assert Dist.from_csv(text).as_dict() == d.as_dict()

    def test_pushforward_and_product(self):
        d = Dist.uniform(range(4)).pushforward(lambda v: v % 2)
        assert d.as_dict() == {0: F(1, 2), 1: F(1, 2)}
        prod = Dist.uniform(range(2)).product(Dist.point(7))
        assert prod.prob((1, 7)) == F(1, 2)


class TestRejectionSampling:
    def test_point_mass(self):
        rs = rejection_sample(Dist.point(0, range(2)), Dist.uniform(range(2)), 1)
        assert rs.pr_accept == F(1, 2)
        assert rs.accepted_law().as_dict()[0] == 1

    def test_identity(self):
        y = Dist((0, 1, 2), (F(1, 2), F(1, 3), F(1, 6)))
        rs = rejection_sample(y, y, 0)
        assert rs.pr_accept == 1
        assert rs.accepted_law().as_dict() == y.as_dict()

    def test_biased_exact(self):
        x = Dist((0, 1), (F(3, 4), F(1, 4)))
        rs = rejection_sample(x, Dist.uniform(range(2)), math.log2(1.5), scale=F(3, 2))
        assert rs.pr_accept == F(2, 3)
        assert rs.accepted_law().as_dict() == x.as_dict()

    def test_biased_empirical(self):
        x = Dist((0, 1), (F(3, 4), F(1, 4)))
        rs = rejection_sample(x, Dist.uniform(range(2)), math.log2(1.5), scale=F(3, 2))
        n = 10**6
        idx, z = rs.draw(np.random.default_rng(11), n)
        acc = z.mean()
        assert abs(acc - 2 / 3) <= 3 * math.sqrt((2 / 3) * (1 / 3) / n)
        kept = idx[z]
        frac0 = float((kept == 0).mean())
        assert abs(frac0 - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / len(kept))

    def test_dmax_violation(self):
        with pytest.raises(ValueError):
            RejectionSampler(Dist.point(0, range(2)), Dist.uniform(range(2)), 0.5)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 20), min_size=2, max_size=8), st.integers(0, 3))
    def test_accept_prob_is_two_to_minus_k(self, ws, k):
        y = Dist(tuple(range(len(ws))), tuple(F(w, sum(ws)) for w in ws))
        # mix Y with a point mass so D_max(X||Y) <= k holds by construction
        lam = F(1, 2**k)
        xs = tuple(lam * q + (1 - lam) * (1 if i == 0 else 0) for i, q in enumerate(y.probs))
        x = Dist(y.support, xs)
        if any(a > F(2**k) * b for a, b in zip(x.probs, y.probs)):
            return
        assert rejection_sample(x, y, k).pr_accept == F(1, 2**k)


class TestWeakSources:
    def test_enum_counts(self):
        assert [s.subset for s in enum_flat_sources(2, 4)] == [(0, 1, 2, 3)]
        assert len(list(enum_flat_sources(2, 2))) == 6

    def test_enum_min_entropy(self):
        for s in range(1, 5):
            for src in enum_flat_sources(2, s):
                assert src.realized_min_entropy == math.log2(s)
                assert min_entropy(src.to_dist()) == pytest.approx(math.log2(s), abs=1e-12)

    def test_enum_budget_samples(self):
        got = list(enum_flat_sources(4, 8, budget=10, seed=3))
        assert len(got) == 10
        assert got == list(enum_flat_sources(4, 8, budget=10, seed=3))

    def test_noninteger_k_rounds_support_up(self):
        src = WeakSourceSpec.random_flat(16, 1.5, seed=0)
        assert src.support_size == 3
        assert src.realized_min_entropy >= 1.5

    def test_json_round_trip(self):
        for src in (WeakSourceSpec.uniform(5), WeakSourceSpec.random_flat(64, 3, seed=9),
                    WeakSourceSpec.with_prefix(6, 4, prefix=2),
                    WeakSourceSpec.from_dist(Dist((0, 1, 2), (F(1, 2), F(1, 4), F(1, 4))))):
            back = WeakSourceSpec.from_json(src.to_json())
            assert back.to_dist().as_dict() == src.to_dist().as_dict()

    def test_prefix_source(self):
        src = WeakSourceSpec.with_prefix(6, 4, prefix=2)
        assert src.support_size == 16
        assert all(v >> 4 == 2 for v in src.outcomes())

    def test_sample_in_support(self):
        src = WeakSourceSpec.random_flat(1 << 20, 5, seed=1)
        rng = np.random.default_rng(0)
        sup = set(src.outcomes())
        assert all(src.sample(rng) in sup for _ in range(200))


def _random_dist(rng, size):
    w = rng.integers(0, 7, size=size)
    if w.sum() == 0:
        w[0] = 1
    return Dist(tuple(range(size)), tuple(F(int(v), int(w.sum())) for v in w))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_stat_dist_metric(seed, size):
    rng = np.random.default_rng(seed)
    p, q, r = (_random_dist(rng, size) for _ in range(3))
    assert stat_dist(p, q) == stat_dist(q, p)
    assert stat_dist(p, p) == 0
    assert stat_dist(p, r) <= stat_dist(p, q) + stat_dist(q, r)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.lists(st.integers(0, 2), min_size=6, max_size=6))
def test_data_processing(seed, size, g):
    rng = np.random.default_rng(seed)
    p, q = _random_dist(rng, size), _random_dist(rng, size)
    gp = p.pushforward(lambda v: g[v], labels=range(3))
    gq = q.pushforward(lambda v: g[v], labels=range(3))
    assert stat_dist(gp, gq) <= stat_dist(p, q)
