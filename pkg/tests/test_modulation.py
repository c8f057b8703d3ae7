import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbuwb.errors import ArgumentError, ConfigurationError
from mbuwb.phy import modulation as mod

SQ2 = np.sqrt(2.0)


def test_qpsk_constellation():
    bits = np.array([0, 0, 0, 1, 1, 0, 1, 1])
    np.testing.assert_allclose(
        mod.map_symbols(bits, "QPSK"), np.array([-1 - 1j, -1 + 1j, 1 - 1j, 1 + 1j]) / SQ2
    )


def test_dcm_matrix_is_orthogonal():
    # inputs are unnormalised +-1 +-j points of energy 2
    np.testing.assert_allclose(mod.DCM_MATRIX @ mod.DCM_MATRIX.T, np.eye(2) / 2, atol=1e-15)


def test_dcm_mapping_of_first_group():
    bits = np.zeros(200, dtype=np.uint8)
    bits[:4] = [1, 0, 0, 1]
    x = mod.map_symbols(bits, "DCM")
    xa, xb = 1 - 1j, -1 + 1j
    assert x[0] == pytest.approx((2 * xa + xb) / np.sqrt(10))
    assert x[50] == pytest.approx((xa - 2 * xb) / np.sqrt(10))


@given(st.integers(0, 2**32 - 1))
def test_dcm_average_energy_is_one(seed):
    bits = np.random.default_rng(seed).integers(0, 2, 200 * 50)
    x = mod.map_symbols(bits, "DCM")
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.05)


def test_dcm_all_sixteen_points_have_mean_unit_energy():
    groups = np.array([[(v >> s) & 1 for s in (3, 2, 1, 0)] for v in range(16)])
    bits = np.zeros((16, 200), dtype=np.uint8)
    bits[:, :4] = groups
    x = mod.map_symbols(bits, "DCM")
    assert np.mean(np.abs(x[:, 0]) ** 2 + np.abs(x[:, 50]) ** 2) == pytest.approx(2.0)


@pytest.mark.parametrize("modname,fds,tds", [("QPSK", True, True), ("QPSK", False, True), ("DCM", False, False)])
def test_noiseless_demap_loopback(modname, fds, tds, rng):
    nbits = mod.bits_per_symbol(modname, fds) * 6
    bits = rng.integers(0, 2, (3, nbits))
    x = mod.spread(mod.map_symbols(bits, modname), fds, tds)
    h = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    u, a = mod.combine_copies(h * x, h, fds, tds)
    llr = mod.demap(u, a, 0.1, modname)
    np.testing.assert_array_equal((llr < 0).astype(int), bits)


def test_qpsk_llr_value():
    # one tone, unit channel: LLR = -2 sqrt(2) Re(y) / N0
    u = np.full((1, 1, 100), 0.3 + 0.1j)
    a = np.ones((1, 1, 100))
    llr = mod.demap_qpsk(u, a, 0.5)
    assert llr[0] == pytest.approx(-2 * SQ2 * 0.3 / 0.5)
    assert llr[1] == pytest.approx(-2 * SQ2 * 0.1 / 0.5)


def test_dcm_llr_matches_brute_force(rng):
    n0 = 0.7
    u = rng.standard_normal((1, 1, 100)) + 1j * rng.standard_normal((1, 1, 100))
    a = np.abs(rng.standard_normal((1, 1, 100))) + 0.1
    llr = mod.demap_dcm(u, a, n0)
    # enumerate all 16 bit groups on tone pair (0, 50)
    num = np.zeros(4)
    den = np.zeros(4)
    for v in range(16):
        g = [(v >> s) & 1 for s in (3, 2, 1, 0)]
        bits = np.zeros(200, dtype=np.uint8)
        bits[:4] = g
        x = mod.map_symbols(bits, "DCM")
        d = abs(u[0, 0, 0] - a[0, 0, 0] * x[0]) ** 2 + abs(u[0, 0, 50] - a[0, 0, 50] * x[50]) ** 2
        p = np.exp(-d / n0)
        for i in range(4):
            (num if g[i] == 0 else den)[i] += p
    np.testing.assert_allclose(llr[:4], np.log(num / den), rtol=1e-9, atol=1e-9)


def test_spreading_layout():
    s = np.arange(100) + 0j
    g = mod.spread(s, fds=True, tds=True)
    assert g.shape == (4, 100)
    np.testing.assert_array_equal(g[0, :50], g[0, 50:])
    np.testing.assert_array_equal(g[0], g[1])


@given(st.sampled_from([100, 200]), st.sampled_from([1, 2, 3, 6]))
def test_interleaver_is_a_permutation(nb, span):
    perm = mod.interleaver_permutation(nb, span)
    assert sorted(perm) == list(range(nb * span))
    x = np.arange(2 * nb * span)
    np.testing.assert_array_equal(mod.deinterleave(mod.interleave(x, perm), perm), x)


def test_interleaver_spreads_neighbours():
    perm = mod.interleaver_permutation(200, 1)
    inv = np.argsort(perm)
    # adjacent coded bits land at least 10 positions apart
    assert np.min(np.abs(np.diff(inv))) >= 10


def test_errors():
    with pytest.raises(ArgumentError):
        mod.map_symbols(np.zeros(3), "QPSK")
    with pytest.raises(ArgumentError):
        mod.map_symbols(np.zeros(100), "DCM")
    with pytest.raises(ConfigurationError):
        mod.map_symbols(np.zeros(4), "16QAM")
    with pytest.raises(ConfigurationError):
        mod.bits_per_symbol("DCM", True)
