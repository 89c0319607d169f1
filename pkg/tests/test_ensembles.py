import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from rmtlab.ensembles import SymmetryClass, gaussian_matrix, ou_evolve, sample_matrix
from rmtlab.entrylaws import Bernoulli, Gaussian, build_matching_law
from rmtlab.profiles import band_profile, generalized_profile, two_block_weights, wigner_profile

LAWS = [Gaussian(), Bernoulli(), build_matching_law(0.5, 3.0), build_matching_law(0.0, 2.0)]


@given(st.integers(1, 12), st.integers(0, 3), st.sampled_from(list(SymmetryClass)), st.integers(0, 2**63 - 1))
def test_hermitian_and_real_diagonal(n, li, cls, seed):
    h = sample_matrix(wigner_profile(n), LAWS[li], cls, seed).entries
    assert np.array_equal(h, h.conj().T)
    assert np.all(np.imag(np.diag(h)) == 0)
    if cls is SymmetryClass.REAL:
        assert h.dtype == float


def test_zero_outside_band():
    p = band_profile(6, 2)
    h = sample_matrix(p, Bernoulli(), "RealSymmetric", 11).entries
    assert np.all(h[p.sigma2 == 0] == 0)
    assert np.all(np.abs(h[p.sigma2 > 0]) == math.sqrt(1 / 3))


def test_gue_entry_variance():
    n = 2
    draws = np.array([sample_matrix(wigner_profile(n), Gaussian(), "ComplexHermitian", s).entries[0, 1]
                      for s in range(100_000)])
    a = np.abs(draws) ** 2
    se = a.std() / math.sqrt(a.size)
    assert abs(a.mean() - 1 / n) < 4 * se
    # real and imaginary parts carry half the variance each
    assert abs(np.var(draws.real) - 0.25) < 0.01


def test_deterministic():
    p = generalized_profile(7, two_block_weights(7))
    a = sample_matrix(p, LAWS[2], "ComplexHermitian", 99)
    b = sample_matrix(p, LAWS[2], "ComplexHermitian", 99)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, sample_matrix(p, LAWS[2], "ComplexHermitian", 100).entries)


def test_row_substreams_independent_of_n():
    # row i of the upper triangle depends only on (seed, i); a larger N extends it
    a = sample_matrix(wigner_profile(5), Gaussian(), "RealSymmetric", 3).entries * math.sqrt(5)
    b = sample_matrix(wigner_profile(8), Gaussian(), "RealSymmetric", 3).entries * math.sqrt(8)
    assert np.allclose(a[0, :5], b[0, :5])


def test_ou_zero_time_identity():
    h0 = sample_matrix(band_profile(12, 3), Bernoulli(), "ComplexHermitian", 5)
    h = ou_evolve(h0, 0.0, 8)
    assert np.array_equal(h.entries, h0.entries)
    assert h.provenance["t"] == 0.0 and h.provenance["flow_seed"] == 8
    with pytest.raises(ValueError):
        ou_evolve(h0, -1.0, 1)


def test_ou_long_time_gaussian():
    n = 100
    h0 = sample_matrix(wigner_profile(n), Bernoulli(), "RealSymmetric", 1)
    iu = np.triu_indices(n, 1)
    pooled = np.concatenate([ou_evolve(h0, 50.0, s).entries[iu] for s in range(21)])
    assert pooled.size > 100_000
    # h0 is fixed here, so the pool mixes 21 shifted copies only by e^{-25}
    assert stats.kstest(pooled * math.sqrt(n), "norm").pvalue > 0.01


def test_ou_entry_variance():
    p = band_profile(6, 2)
    t = 0.7
    iu = np.triu_indices(6, 1)
    vals = []
    mask = p.sigma2[iu] > 0
    for s in range(17_000):
        h0 = sample_matrix(p, Bernoulli(), "RealSymmetric", s)
        vals.append(ou_evolve(h0, t, 10**6 + s).entries[iu][mask])
    x = np.concatenate(vals)
    assert x.size >= 100_000
    target = math.exp(-t) / 3 + (1 - math.exp(-t)) / 6
    se = np.std(x ** 2) / math.sqrt(x.size)
    assert abs(np.mean(x ** 2) - target) < 4 * se


@given(st.floats(0, 20))
def test_ou_row_variance_conserved(t):
    # sum_i Var(h_t,ij) = e^{-t} sum_i sigma2_ij + (1 - e^{-t})
    p = generalized_profile(6, two_block_weights(6))
    var = math.exp(-t) * p.sigma2 + (1 - math.exp(-t)) / 6
    assert np.allclose(var.sum(axis=0), 1, atol=1e-12)


def test_ou_cumulative_time():
    h0 = gaussian_matrix(8, "ComplexHermitian", 1)
    h = ou_evolve(ou_evolve(h0, 0.5, 2), 0.25, 3)
    assert h.provenance["t"] == 0.75 and h.provenance["flow_seed"] == 3


def test_eig_cached_and_csv(tmp_path):
    m = gaussian_matrix(6, "ComplexHermitian", 4)
    w, v = m.eigh()
    assert np.allclose(m.entries @ v, v * w, atol=1e-12)
    assert np.array_equal(m.eigvalsh(), w)
    m.to_csv(tmp_path / "h.csv")
    raw = np.loadtxt(tmp_path / "h.csv", delimiter=",")
    assert np.array_equal(raw[:, 0::2] + 1j * raw[:, 1::2], m.entries)
