import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmtlab.ensembles import gaussian_matrix, sample_matrix
from rmtlab.entrylaws import Bernoulli, build_matching_law
from rmtlab.errors import DomainError
from rmtlab.profiles import band_profile, generalized_profile, two_block_weights, wigner_profile
from rmtlab.resolvent import (CSV_HEADER, green, green_matrix, interlacing_holds, minor_green,
                              minor_identity_residuals, stieltjes, swap_expansion_residual, upsilon,
                              upsilon_all, ward_residual)
from rmtlab.semicircle import msc
from conftest import random_hermitian

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_scalar_green():
    ev = green(np.array([[0.7]]), 0.2 + 0.3j)
    assert abs(ev.m_n - 1 / (0.7 - 0.2 - 0.3j)) < 1e-15
    assert ev.offdiag_max == 0.0


def test_two_by_two_green():
    g = green(SWAP, 1j).g
    # H^2 = I gives (H - i)^{-1} = (H + i)/2
    assert np.allclose(g, (SWAP + 1j * np.eye(2)) / 2, atol=1e-15)


def test_green_rejects_real_z():
    with pytest.raises(DomainError):
        green(SWAP, 0.5)


@given(st.integers(1, 20), st.floats(-3, 3), st.floats(1e-3, 5), st.integers(0, 10**6))
def test_green_invariants(n, e, eta, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    z = complex(e, eta)
    ev = green(h, z)
    assert np.max(np.abs((h - z * np.eye(n)) @ ev.g - np.eye(n))) <= 1e-12 * (1 + 1 / eta ** 2)
    assert abs(ev.m_n - np.trace(ev.g) / n) < 1e-12 * (1 + 1 / eta)
    assert ev.m_n.imag > 0 and np.all(ev.g_diag.imag > 0)
    fast = green(h, z, full=False, offdiag=False)
    assert np.allclose(fast.g_diag, ev.g_diag, atol=1e-12 / eta)
    assert abs(stieltjes(np.linalg.eigvalsh(h), z) - ev.m_n) < 1e-12 / eta


def test_green_lambda_d_and_csv():
    h = gaussian_matrix(30, "ComplexHermitian", 2)
    z = 0.1 + 0.5j
    ev = green(h, z)
    assert ev.lambda_d == pytest.approx(np.max(np.abs(np.diag(green_matrix(h, z)) - msc(z))))
    assert len(ev.csv_row()) == len(CSV_HEADER)


def test_minor_two_by_two():
    mq = minor_green(SWAP, [1], 1j)
    assert abs(mq.g_minor[0, 0] - 1j) < 1e-15
    g = green_matrix(SWAP, 1j)
    assert abs((g[0, 0] - mq.g_minor[0, 0]) - g[0, 1] * g[1, 0] / g[1, 1]) < 1e-15
    assert abs(g[0, 0] - mq.g_minor[0, 0] - (-0.5j)) < 1e-15


def test_minor_scalar_and_schur():
    rng = np.random.default_rng(4)
    h = random_hermitian(rng, 6)
    z = 0.2 + 0.4j
    mq = minor_green(h, [0, 1, 2, 4, 5], z)
    assert abs(mq.g_minor[0, 0] - 1 / (h[3, 3] - z)) < 1e-14
    for t in ([2], [0, 3], [1, 2, 5]):
        mq = minor_green(h, t, z)
        assert mq.schur_residual(green_matrix(h, z)) < 1e-12
        # K = h - z - Z on T x T
        tt = list(mq.index_set)
        assert np.allclose(mq.k_mat, h[np.ix_(tt, tt)] - z * np.eye(len(tt)) - mq.z_mat, atol=0)
    with pytest.raises(ValueError):
        minor_green(h, range(6), z)


def test_gii_inverse_k():
    h = random_hermitian(np.random.default_rng(8), 8)
    z = 0.3 + 0.5j
    g = green_matrix(h, z)
    for i in range(8):
        mq = minor_green(h, [i], z)
        assert abs(g[i, i] - 1 / mq.k_mat[0, 0]) < 1e-10


def test_identities_random_eight():
    h = random_hermitian(np.random.default_rng(1), 8)
    res = minor_identity_residuals(h, 0.3 + 0.5j)
    assert set(res) == {"GiiHii", "GijHij", "GiiGjii", "GijGkij"}
    assert max(res.values()) < 1e-10


def test_identities_two_by_two_and_diagonal():
    res = minor_identity_residuals(SWAP, 1j)
    assert res["GiiGjii"] < 1e-15
    d = np.diag([0.3, -1.0, 2.0, 0.1])
    res = minor_identity_residuals(d, 0.5j)
    assert res["GijHij"] == 0.0


def test_identities_many_draws():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 12))
        z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 2))
        res = minor_identity_residuals(random_hermitian(rng, n), z)
        worst = max(worst, max(res.values()) / (1 + z.imag ** -2))
    assert worst < 1e-10


def test_identities_sampled_tuples():
    h = gaussian_matrix(40, "ComplexHermitian", 3)
    res = minor_identity_residuals(h, 0.1 + 0.2j, n_tuples=30, seed=5)
    assert max(res.values()) < 1e-10 * (1 + 25)


@given(st.integers(1, 25), st.floats(-3, 3), st.floats(1e-3, 3), st.integers(0, 10**6))
def test_ward(n, e, eta, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    assert ward_residual(h, complex(e, eta)) < 1e-9


@given(st.integers(2, 20), st.integers(0, 10**6))
def test_interlacing(n, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    for k in range(n):
        assert interlacing_holds(h, k)


def test_interlacing_diagonal():
    assert interlacing_holds(np.diag([0.0, 1.0, 2.0]), 1)


def test_stieltjes_monotone_in_eta():
    lam = np.linalg.eigvalsh(gaussian_matrix(60, "RealSymmetric", 9).entries)
    ys = np.geomspace(1e-3, 10, 200)
    for e in (-1.5, 0.0, 0.7):
        vals = ys * stieltjes(lam, e + 1j * ys).imag
        assert np.all(np.diff(vals) >= -1e-12)


def test_upsilon_two_forms_agree():
    for seed in range(20):
        p = generalized_profile(16, two_block_weights(16))
        h = sample_matrix(p, build_matching_law(0.5, 3.0), "ComplexHermitian", seed)
        for i in (0, 7, 15):
            ua, ub = upsilon(h, p.sigma2, 0.5 + 0.1j, i)
            assert abs(ua - ub) <= 1e-9


def test_upsilon_scalar():
    h = np.array([[0.4]])
    z = 0.1 + 0.2j
    g = 1 / (0.4 - z)
    ua, ub = upsilon(h, np.array([[1.0]]), z, 0)
    assert abs(ua - (1 / g + z + g)) < 1e-14
    assert abs(ua - ub) < 1e-14


def test_upsilon_shrinks_with_eta():
    n = 1000
    h = gaussian_matrix(n, "ComplexHermitian", 12)
    s = wigner_profile(n).sigma2
    etas = [n ** -p for p in (0.3, 0.5, 0.8)]
    big = [np.max(np.abs(upsilon_all(h, s, 1j * eta))) for eta in etas]
    assert big[0] < big[1] < big[2]
    # at the centre kappa = 0, so the size is about 1/sqrt(N eta) up to a log factor
    scaled = [b * np.sqrt(n * eta) for b, eta in zip(big, etas)]
    assert max(scaled) < 6 and max(scaled) / min(scaled) < 2


def test_upsilon_all_matches_pointwise():
    p = band_profile(20, 3)
    h = sample_matrix(p, Bernoulli(), "RealSymmetric", 2)
    allv = upsilon_all(h, p, 0.3 + 0.4j)
    for i in (0, 5, 19):
        assert abs(allv[i] - upsilon(h, p, 0.3 + 0.4j, i)[0]) < 1e-12


def _q(n, seed):
    q = gaussian_matrix(n, "RealSymmetric", seed).entries.copy()
    q[0, 1] = q[1, 0] = 0.0
    return q


def test_swap_exact_tail_and_zero_entry():
    q = _q(30, 1)
    assert swap_expansion_residual(q, 0, 1, 0.6 - 0.8j, 0.2 + 0.5j, order=5) <= 1e-10
    for order in range(1, 6):
        assert swap_expansion_residual(q, 0, 1, 0.0, 0.2 + 0.5j, order=order) == 0.0
    with pytest.raises(ValueError):
        swap_expansion_residual(q, 0, 2, 1.0, 1j)
    with pytest.raises(ValueError):
        swap_expansion_residual(q, 0, 1, 1.0, 1j, order=6)


def test_swap_truncation_scaling():
    ns = [50, 100, 200, 400]
    v = np.exp(0.3j)
    z = 0.3 + 0.5j
    for m in (1, 2, 3):
        errs = [np.median([swap_expansion_residual(_q(n, s), 0, 1, v, z, order=m) for s in range(6)])
                for n in ns]
        slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert abs(slope + (m + 1) / 2) <= 0.3, (m, slope)
