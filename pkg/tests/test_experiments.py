import itertools
import math

import numpy as np
import pytest
from scipy.special import erfc

from rmtlab.entrylaws import Bernoulli, Gaussian, build_matching_law, matched_gaussian_divisible
from rmtlab.errors import InsufficientGaps, StatisticUnknown, WindowNotInBulk
from rmtlab.experiments import (derive_seed, four_moment_swap, gap_universality, ldp_tails,
                                local_law_scan, rigidity_scaling,
                                telescoping_terms, trace_moment_bound)
from rmtlab.experiments.common import fit_loglog, parallel_map, summarize
from rmtlab.experiments.ldp import fit_envelope, normalized_statistic, tail_exponent
from rmtlab.experiments.moments import (catalan, is_closed_walk_valid, ordered_closed_walks, s_ratio_bound,
                                        s_term, walk_bound, walk_count)
from rmtlab.experiments.swap import statistic
from rmtlab.profiles import band_profile, wigner_profile


def brute_walk_count(k, p):
    """Labelled sequences over p symbols using all of them, modulo relabelling."""
    hits = sum(1 for w in itertools.product(range(p), repeat=k)
               if len(set(w)) == p and is_closed_walk_valid(w))
    return hits // math.factorial(p)


@pytest.mark.parametrize("k", range(1, 8))
def test_walk_count_brute_force(k):
    for p in range(1, k // 2 + 2):
        assert walk_count(k, p) == brute_walk_count(k, p)


def test_walk_examples_and_bound():
    assert walk_count(2, 1) == 1 and ordered_closed_walks(2, 1) == ((1, 1),)
    assert walk_count(2, 2) == 1 and ordered_closed_walks(2, 2) == ((1, 2),)
    assert walk_bound(2, 2) == 4
    assert walk_count(4, 3) == 2 == catalan(2)
    for k in range(1, 9):
        for p in range(1, k + 1):
            assert walk_count(k, p) <= walk_bound(k, p)
            if 2 * p - 2 > k:
                assert walk_count(k, p) == 0


def test_walks_on_tree_are_catalan():
    for m in range(1, 5):
        assert walk_count(2 * m, m + 1) == catalan(m)


def test_walks_are_canonical():
    for w in ordered_closed_walks(6, 3):
        firsts = [w.index(v) for v in sorted(set(w))]
        assert firsts == sorted(firsts) and w[0] == 1


def test_s_ratio():
    n, d = 1000.0, 0.05
    for k in (4, 6, 8):
        for p in range(2, k // 2 + 2):
            lhs = s_term(k, p - 1, n, d) / s_term(k, p, n, d)
            assert lhs <= s_ratio_bound(k, n, d)


def test_trace_moment_report():
    rep = trace_moment_bound(k_max=6, n=60, samples=40, master_seed=3)
    assert rep.rules["walk_bound"]["passed"] and rep.rules["walk_values"]["passed"]
    assert "catalan_k=2" in rep.rules and "catalan_k=4" in rep.rules


def test_trace_second_moment_exact():
    # sum of variances per column is 1, so E Tr H^2 / N = 1 exactly; a single draw is close
    rep = trace_moment_bound(k_max=2, n=200, samples=3, mc_ks=(2,), master_seed=1)
    row = [c for c in rep.cells if c["statistic"] == "trace_moment"][0]
    assert abs(row["mean"] - 1) < 0.02


def test_ldp_gaussian_oracle():
    rep = ldp_tails(Gaussian(), "linear", coefficients=np.eye(1, 10, 0).ravel(), samples=200_000, master_seed=5)
    row = [c for c in rep.cells if c["statistic"] == "gaussian_tail_oracle"][0]
    assert row["mean"] == pytest.approx(float(erfc(3 / math.sqrt(2))))
    assert abs(row["mean"] - 2.70e-3) < 1e-5
    assert rep.passed


def test_ldp_zero_threshold():
    rep = ldp_tails(Bernoulli(), "linear", d_grid=(0, 1, 2), samples=10_000, master_seed=1)
    tails = [c["mean"] for c in rep.cells if c["statistic"] == "tail"]
    assert tails[0] == 1.0


def test_ldp_single_pair_offdiag():
    b = np.zeros((2, 2))
    b[0, 1] = b[1, 0] = 1.0
    a = np.array([[1.0, 2.0], [-1.5, 0.5]])
    assert np.allclose(normalized_statistic("quadratic-offdiag", b, a), np.abs(2 * a[:, 0] * a[:, 1]) / math.sqrt(2))
    rep = ldp_tails(build_matching_law(0.5, 3.0), "quadratic-offdiag", coefficients=b, samples=100_000)
    assert rep.rules["envelope"]["passed"]


def test_tail_exponents():
    assert tail_exponent("linear", 1) == pytest.approx(2 / 3)
    assert tail_exponent("quadratic-diag", 1) == 0.5
    assert tail_exponent("quadratic-offdiag", 1) == 0.25
    env = fit_envelope([1, 2, 3], [0.3, 0.05, 0.004], 0.5)
    d = np.array([1, 2, 3.0])
    assert np.all(np.array([0.3, 0.05, 0.004]) <= env["C"] * np.exp(-env["c"] * d ** 0.5) * (1 + 1e-12))
    one = fit_envelope([1, 2], [0.1, 0.0], 0.5)
    assert one["c"] == 1.0 and one["C"] == pytest.approx(0.1 * math.e)
    assert fit_envelope([1, 2], [0.0, 0.0], 0.5)["C"] == 0.0


def test_ldp_degenerate_bernoulli_diag():
    # a^2 - 1 vanishes for signs, so the tail is empty and trivially dominated
    rep = ldp_tails(Bernoulli(), "quadratic-diag", samples=10_000)
    assert rep.rules["envelope"]["passed"]


def test_swap_identical_laws():
    law = build_matching_law(0.5, 3.0)
    rep = four_moment_swap(wigner_profile(30), law, law, [0.5 + 0.1j], samples=50, master_seed=2,
                           bootstrap=100)
    assert rep.fits["delta"]["matched"] == 0.0
    lo, hi = rep.fits["delta"]["matched_ci"]
    assert lo <= 0 <= hi


def test_swap_unknown_statistic():
    with pytest.raises(StatisticUnknown):
        statistic("log_det")
    with pytest.raises(StatisticUnknown):
        four_moment_swap(wigner_profile(5), Gaussian(), Gaussian(), [1j], statistic_name="nope", samples=2)


def test_statistics_registry():
    lam = np.array([-1.0, 0.5])
    zs = [0.2 + 0.3j, -0.4 + 0.1j]
    m = np.mean(1 / (lam[:, None] - np.array(zs)[None, :]), axis=0)
    assert statistic("re_m")(lam, zs) == pytest.approx(m[0].real)
    assert statistic("im_m")(lam, zs) == pytest.approx(m[0].imag)
    assert statistic("prod_im_m")(lam, zs) == pytest.approx(m[0].imag * m[1].imag)


def test_telescoping_sum():
    prof = band_profile(12, 2)
    v, w = Bernoulli(), build_matching_law(0.0, 2.0)
    terms = telescoping_terms(prof, v, w, [0.3 + 0.2j], seed=4)
    from rmtlab.ensembles import sample_matrix
    f = statistic("im_m")
    total = (f(np.linalg.eigvalsh(sample_matrix(prof, w, "RealSymmetric", 4).entries), [0.3 + 0.2j])
             - f(np.linalg.eigvalsh(sample_matrix(prof, v, "RealSymmetric", 4).entries), [0.3 + 0.2j]))
    assert terms.size == 12 * 13 // 2
    assert abs(terms.sum() - total) < 1e-12
    with pytest.raises(ValueError):
        telescoping_terms(wigner_profile(101), v, w, [1j])


def test_gap_edge_window_rejected():
    with pytest.raises(WindowNotInBulk):
        gap_universality(wigner_profile(50), wigner_profile(50), Gaussian(), Gaussian(), window=(1.9, 2.1))


def test_gap_insufficient():
    with pytest.raises(InsufficientGaps):
        gap_universality(wigner_profile(50), wigner_profile(50), Gaussian(), Gaussian(), samples=2)


def test_gap_gue_vs_gue():
    p = wigner_profile(400)
    rep = gap_universality(p, p, Gaussian(), Gaussian(), samples=6, master_seed=8)
    assert rep.fits["ks"]["pvalue"] > 0.01
    assert rep.extra["warnings"] == []
    rep2 = gap_universality(p, p, Bernoulli(), Gaussian(), samples=6, master_seed=8)
    assert any("two-point" in w for w in rep2.extra["warnings"])


def test_local_law_macroscopic():
    rep = local_law_scan(wigner_profile(500), Gaussian(), eta_grid=[10.0], samples=3, master_seed=1)
    row = [c for c in rep.cells if c["statistic"] == "lambda_d"][0]
    assert row["q95"] <= 0.05


def test_local_law_skips_inadmissible():
    rep = local_law_scan(wigner_profile(50), Gaussian(), e_grid=[1.99], eta_grid=[1e-3, 2e-3], samples=2)
    assert len(rep.skipped) == 2 and not rep.rules


@pytest.mark.slow
def test_averaged_law_beats_pointwise():
    n = 1000
    eta = n ** -0.8
    rep = local_law_scan(wigner_profile(n), Gaussian(), cls="RealSymmetric", eta_grid=[eta], samples=200,
                         master_seed=17)
    point = [c for c in rep.cells if c["statistic"] == "abs_m_minus_msc"][0]["median"]
    avg = [c for c in rep.cells if c["statistic"] == "abs_mean_m_minus_msc"][0]["mean"]
    assert avg <= point / 10


def test_rigidity_small():
    rep = rigidity_scaling(n_list=(40, 80), samples=6, master_seed=2)
    assert set(rep.rules) == {"rigidity_slope", "rigidity_bulk_at_max_n"}
    assert len(rep.extra["counting_l1_means"]) == 2


def test_seed_derivation_and_parallel_map():
    assert derive_seed(1, "a", 0) == derive_seed(1, "a", 0)
    assert len({derive_seed(1, "a", i) for i in range(1000)}) == 1000
    assert derive_seed(1, "a", 0) != derive_seed(1, "b", 0)
    assert parallel_map(lambda x: x * x, range(20), 4) == [x * x for x in range(20)]


def test_summary_and_fit():
    s = summarize([1.0, 2.0, 3.0, 4.0])
    assert s["count"] == 4 and s["median"] == 2.5
    slope, _ = fit_loglog([1, 10, 100], [3, 0.3, 0.03])
    assert slope == pytest.approx(-1.0)


def test_reports_deterministic():
    law = matched_gaussian_divisible(0.5, 3.0, 0.1)
    a = four_moment_swap(wigner_profile(20), build_matching_law(0.5, 3.0), law, [0.5 + 0.1j], samples=20,
                         master_seed=9, threads=1, bootstrap=50)
    b = four_moment_swap(wigner_profile(20), build_matching_law(0.5, 3.0), law, [0.5 + 0.1j], samples=20,
                         master_seed=9, threads=3, bootstrap=50)
    assert a.cells_csv() == b.cells_csv()
