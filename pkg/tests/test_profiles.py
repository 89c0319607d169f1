import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmtlab.errors import SinkhornDivergence, SupportTooWide
from rmtlab.profiles import (band_profile, circulant_spectrum, dft_spectral_check, generalized_profile,
                             periodic_distance, profile_from_spec, spectral_gap, two_block_weights,
                             wigner_profile)


def test_wigner_constant():
    p = wigner_profile(4)
    assert np.all(p.sigma2 == 0.25)
    assert np.allclose(p.sigma2.sum(axis=1), 1)
    assert p.m_param == 4


def test_wigner_gap():
    dm, dp, simple = spectral_gap(wigner_profile(4))
    assert abs(dm - 1) < 1e-12 and abs(dp - 1) < 1e-12 and simple


def test_scalar_profile():
    p = wigner_profile(1)
    assert p.sigma2[0, 0] == 1 and p.m_param == 1
    assert spectral_gap(p) == (1.0, 1.0, True)


def test_generalized_flat_is_wigner():
    p = generalized_profile(5, np.full((5, 5), 3.7))
    assert np.allclose(p.sigma2, wigner_profile(5).sigma2, atol=1e-14)


def test_generalized_two_by_two():
    p = generalized_profile(2, np.array([[1.0, 2.0], [2.0, 1.0]]))
    s = p.sigma2
    # symmetric scaling d_i d_j w_ij with equal d: x = 2/3 off-diagonal, 1/3 diagonal
    assert abs(s[0, 1] - 2 / 3) < 1e-12 and abs(s[0, 0] - 1 / 3) < 1e-12
    assert s[0, 0] == s[1, 1] and s[0, 1] == s[1, 0]
    assert np.allclose(s.sum(axis=1), 1, atol=1e-12)


def test_generalized_asymmetric_two_by_two():
    # oracle: row sums d1^2 a + d1 d2 c = 1 and d2^2 b + d1 d2 c = 1
    a, b, c = 1.0, 4.0, 2.0
    # ratio condition: a + c r = b r^2 + c r  ->  r = sqrt(a/b)
    r = np.sqrt(a / b)
    d1 = 1 / np.sqrt(a + c * r)
    d2 = r * d1
    p = generalized_profile(2, np.array([[a, c], [c, b]]))
    assert abs(p.sigma2[0, 1] - d1 * d2 * c) < 1e-12
    assert abs(p.sigma2[1, 1] - d2 * d2 * b) < 1e-12


def test_generalized_rejects_zero_and_asymmetric():
    w = np.ones((3, 3))
    w[0, 2] = w[2, 0] = 0
    with pytest.raises(ValueError):
        generalized_profile(3, w)
    w = np.ones((3, 3))
    w[0, 1] = 2
    with pytest.raises(ValueError):
        generalized_profile(3, w)


def test_sinkhorn_divergence():
    with pytest.raises(SinkhornDivergence):
        w = np.random.default_rng(0).uniform(0.01, 100.0, (8, 8))
        generalized_profile(8, w + w.T, max_iter=2)


def test_two_block_constants():
    p = profile_from_spec({"type": "generalized", "n": 8, "params": {"weights_kind": "two_block"}})
    assert np.allclose(p.sigma2.sum(axis=0), 1, atol=1e-12)
    assert abs(p.c_inf - 0.5) < 1e-12 and abs(p.c_sup - 1.5) < 1e-12


def test_band_six_two():
    p = band_profile(6, 2)
    expected = np.zeros(6)
    expected[[0, 1, 5]] = 1 / 3
    for i in range(6):
        assert np.allclose(p.sigma2[i], np.roll(expected, i), atol=1e-15)
    assert abs(p.m_param - 3) < 1e-12
    assert p.meta["raw_max"] == 0.5
    assert p.meta["raw_M"] == 2 == p.meta["raw_M_bound"]


def test_band_gap_example():
    dm, dp, simple = spectral_gap(band_profile(6, 2))
    assert abs(dm - 2 / 3) < 1e-12 and abs(dp - 1 / 3) < 1e-12 and simple
    p = np.arange(6)
    oracle = np.sort((1 + 2 * np.cos(2 * np.pi * p / 6)) / 3)
    assert np.allclose(np.sort(circulant_spectrum(band_profile(6, 2).sigma2[0])), oracle, atol=1e-14)


def test_band_full_support_is_flat():
    for n in (5, 6, 9):
        # uniform on [-N/(2W), N/(2W)] with W = N/2 covers every periodic distance
        p = band_profile(n, n / 2, h=1.0)
        assert np.allclose(p.sigma2, 1 / n, atol=1e-15)


def test_support_too_wide():
    with pytest.raises(SupportTooWide):
        band_profile(10, 4, "truncated_gaussian")
    band_profile(24, 4, "truncated_gaussian")


def test_periodic_distance_range():
    d = periodic_distance(7)
    assert d.max() <= 3 and d.min() >= -3
    d = periodic_distance(6)
    assert d.max() == 3 and d.min() == -2


@given(st.integers(4, 120), st.floats(0.6, 20), st.sampled_from(["uniform", "triangular", "truncated_gaussian"]))
def test_band_invariants(n, w, f):
    try:
        p = band_profile(n, w, f)
    except SupportTooWide:
        return
    s = p.sigma2
    assert np.array_equal(s, s.T)
    assert np.allclose(s.sum(axis=1), 1, atol=1e-12)
    assert dft_spectral_check(p) < 1e-9
    ev = np.linalg.eigvalsh(s)
    assert abs(ev[-1] - 1) < 1e-12
    top = np.linalg.eigh(s)[1][:, -1]
    assert abs(abs(top @ np.ones(n)) / np.sqrt(n) - 1) < 1e-8 or ev[-2] > 1 - 1e-9


@given(st.integers(8, 20), st.integers(0, 40))
def test_uniform_band_gap_floor(w, extra):
    n = 8 * w + extra
    assert band_profile(n, w).delta_minus >= 0.2


@given(st.integers(2, 12), st.integers(0, 10**6))
def test_generalized_invariants(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.2, 3.0, (n, n))
    p = generalized_profile(n, a + a.T)
    assert 0 < p.c_inf <= p.c_sup < np.inf
    assert np.allclose(p.sigma2.sum(axis=1), 1, atol=1e-12)
    dm, dp, _ = p.gap()
    assert dm >= p.c_inf - 1e-12 and dp >= p.c_inf - 1e-12


def test_spec_round_trip_and_summary():
    spec = {"type": "band", "n": 40, "params": {"w": 5.0, "f": "triangular"}}
    p = profile_from_spec(spec)
    assert p.to_json() == spec
    q = profile_from_spec(p.to_json())
    assert np.array_equal(p.sigma2, q.sigma2)
    summ = p.summary()
    assert summ["c_inf"] == 0.0 and summ["simple_top"]
    with pytest.raises(ValueError):
        profile_from_spec({"type": "lattice", "n": 3})


def test_csv_export(tmp_path):
    p = two_block_weights(6)
    prof = generalized_profile(6, p)
    prof.to_csv(tmp_path / "s.csv")
    assert np.array_equal(np.loadtxt(tmp_path / "s.csv", delimiter=","), prof.sigma2)
