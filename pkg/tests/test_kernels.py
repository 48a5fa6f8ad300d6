import itertools

import numpy as np
import pytest

from extractorlab import kernels

BACKENDS = kernels.backends()


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def test_selected_backend_is_listed():
    assert kernels.BACKEND in BACKENDS


def test_compiled_backend_available():
    # the build ships the extension; the fallback exists for environments without it
    assert "compiled" in BACKENDS


def _digits(p, n):
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 2), (7, 3)])
def test_ip_table_matches_loop(impl, p, n):
    d = _digits(p, n)
    t = impl.ip_table(d, d, p)
    for i, j in itertools.product(range(len(d)), repeat=2):
        assert t[i, j] == sum(int(a) * int(b) for a, b in zip(d[i], d[j])) % p


def test_ip_table_large_prime_no_overflow(impl):
    p = 67108879
    x = np.array([[p - 1, p - 2]], dtype=np.int64)
    y = np.array([[p - 1, p - 1]], dtype=np.int64)
    assert int(impl.ip_table(x, y, p)[0, 0]) == ((p - 1) ** 2 + (p - 2) * (p - 1)) % p


def test_joint_counts(impl):
    rng = np.random.default_rng(1)
    table = rng.integers(0, 4, size=(12, 5)).astype(np.int32)
    wx = rng.integers(0, 9, size=12)
    got = impl.joint_counts(table, wx, 4)
    want = np.zeros((5, 4), dtype=np.int64)
    for x in range(12):
        for y in range(5):
            want[y, table[x, y]] += wx[x]
    assert np.array_equal(got, want)


def test_collision_counts(impl):
    rng = np.random.default_rng(2)
    table = rng.integers(0, 3, size=(7, 9)).astype(np.int32)
    got = impl.collision_counts(table)
    for a, b in itertools.product(range(7), repeat=2):
        assert got[a, b] == int((table[a] == table[b]).sum())


def test_gf2m_mul_table(impl):
    t = impl.gf2m_mul_table(4, 0x13)
    assert t[0x3, 0x7] == 0x9
    assert np.array_equal(t, t.T)
    assert np.array_equal(t[1], np.arange(16))


def test_pair_slice_l1_matches_direct(impl):
    p = 3
    rng = np.random.default_rng(3)
    ztab = rng.integers(0, p, size=(9, 4)).astype(np.int32)
    wx = rng.integers(0, 5, size=9)
    got = impl.pair_slice_l1(ztab, wx, p)
    for y, y2 in itertools.product(range(4), repeat=2):
        if y == y2:
            assert got[y, y2] == 0
            continue
        c = np.zeros((p, p), dtype=np.int64)
        for x in range(9):
            c[ztab[x, y], ztab[x, y2]] += wx[x]
        col = c.sum(axis=0)
        assert got[y, y2] == sum(abs(p * c[z, z2] - col[z2]) for z in range(p) for z2 in range(p))


def test_backends_agree_on_random_inputs():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend importable")
    py, cy = BACKENDS["python"], BACKENDS["compiled"]
    rng = np.random.default_rng(4)
    d = rng.integers(0, 5, size=(40, 3))
    e = rng.integers(0, 5, size=(30, 3))
    t = py.ip_table(d, e, 5)
    assert np.array_equal(t, cy.ip_table(d, e, 5))
    w = rng.integers(0, 100, size=40)
    assert np.array_equal(py.joint_counts(t, w, 5), cy.joint_counts(t, w, 5))
    assert np.array_equal(py.collision_counts(t), cy.collision_counts(t))
    assert np.array_equal(py.pair_slice_l1(t, w, 5), cy.pair_slice_l1(t, w, 5))
    assert np.array_equal(py.gf2m_mul_table(5, 0x25), cy.gf2m_mul_table(5, 0x25))
