import math

import numpy as np
import pytest

from specbound import coeffs, experiments
from specbound.errors import ParameterError
from specbound.sampling import GAUSSIAN, RADEMACHER, SeedSpec, sample_matrix


def test_estimate_zero_matrix():
    zero = coeffs.CoefficientMatrix(np.zeros((6, 6)), "symmetric")
    est = experiments.estimate_expected_norm(zero, GAUSSIAN, 5, seed=0)
    assert est.mean == 0.0 and est.std_error == 0.0


def test_estimate_deterministic_and_thread_invariant():
    C = coeffs.wigner(24)
    a = experiments.estimate_expected_norm(C, GAUSSIAN, 16, seed=5, threads=1)
    b = experiments.estimate_expected_norm(C, GAUSSIAN, 16, seed=5, threads=4)
    assert a.mean == b.mean
    assert np.array_equal(a.per_trial_values, b.per_trial_values)
    c = experiments.estimate_expected_norm(C, GAUSSIAN, 16, seed=6)
    assert c.mean != a.mean


def test_estimate_wigner_scale():
    C = coeffs.wigner(48)
    est = experiments.estimate_expected_norm(C, GAUSSIAN, 60, seed=1)
    # edge of the spectrum sits near 2 sqrt(n) already at n = 48
    assert 1.6 <= est.mean / math.sqrt(48) <= 2.1


def test_estimate_requires_two_trials():
    with pytest.raises(ParameterError):
        experiments.estimate_expected_norm(coeffs.wigner(4), GAUSSIAN, 1, seed=0)


def test_resolve_k_rule():
    assert experiments.resolve_k_rule("const:3", 100) == (3, "const:3")
    k, label = experiments.resolve_k_rule("log_sq", 2**14)
    assert k == round(math.log(2**14) ** 2) == 94
    assert label == "log_sq"
    k, _ = experiments.resolve_k_rule("c_log:2", 1000)
    assert k == round(2 * math.log(1000))
    k, _ = experiments.resolve_k_rule("sqrt", 400)
    assert k == 20
    with pytest.raises(ParameterError):
        experiments.resolve_k_rule("cubed", 100)
    with pytest.raises(ParameterError):
        experiments.resolve_k_rule("const", 100)


def test_regular_random_pattern():
    C = experiments.regular_random_pattern(50, 7, seed=3)
    a = C.toarray()
    assert np.array_equal(a, a.T)
    assert np.all(np.count_nonzero(a, axis=1) == 7)
    again = experiments.regular_random_pattern(50, 7, seed=3)
    assert np.array_equal(a, again.toarray())
    with pytest.raises(ParameterError):
        experiments.regular_random_pattern(51, 7, seed=0)  # n*k odd


def test_phase_scan_band_small():
    grid = experiments.phase_scan(
        "band", [128, 256], "const:3", GAUSSIAN, trials=8, seed=9
    )
    assert len(grid.rows) == 2
    for row in grid.rows:
        assert row["k"] == 3  # actual degree of the cyclic band with half-width 1
        assert row["ratio_mean"] > 1.0
        assert row["k_rule"] == "const:3"
    # ratios against the true degree: cyclic band rows all have 2*1+1 entries
    C = coeffs.band_cyclic(128, 1)
    assert experiments._max_row_degree(C) == 3


def test_phase_scan_regular_random():
    grid = experiments.phase_scan(
        "regular_random", [64], "const:4", GAUSSIAN, trials=5, seed=2
    )
    assert grid.rows[0]["k"] == 4


def test_phase_ratio_decreasing_in_k():
    # denser rows push ||X||/sqrt(k) down toward the bulk edge (trend, not
    # per-sample): k = 3, 15, 63 at fixed n
    n = 1024
    means = []
    for k in (3, 15, 63):
        grid = experiments.phase_scan(
            "band", [n], f"const:{k}", GAUSSIAN, trials=12, seed=14
        )
        means.append(grid.rows[0]["ratio_mean"])
    assert means[0] > means[1] > means[2]


def test_phase_scan_rejects_bad_input():
    with pytest.raises(ParameterError):
        experiments.phase_scan("ring", [64], "const:3", GAUSSIAN, 5, 0)
    with pytest.raises(ParameterError):
        experiments.phase_scan("band", [8], "const:20", GAUSSIAN, 5, 0)


def test_phase_grid_csv_roundtrip(tmp_path):
    grid = experiments.phase_scan("band", [64], "const:3", GAUSSIAN, trials=4, seed=1)
    path = tmp_path / "grid.csv"
    grid.write_csv(path)
    text = path.read_text().splitlines()
    assert text[0] == "n,k,ratio_mean,ratio_stderr,k_rule"
    assert len(text) == 2


def test_tail_empirics_wigner_small():
    C = coeffs.wigner(16)
    rows = experiments.tail_empirics(
        C, GAUSSIAN, 0.5, 1000, [0.0, 1.0, 2.0], seed=4
    )
    assert rows[0]["empirical_survival"] <= 1.0
    surv = [r["empirical_survival"] for r in rows]
    assert all(a >= b for a, b in zip(surv, surv[1:]))  # nested events
    for r in rows:
        se = math.sqrt(max(r["bound_value"] * (1 - r["bound_value"]), 1e-12) / 1000)
        assert r["empirical_survival"] <= r["bound_value"] + 3 * se + 1e-12


def test_tail_empirics_bounded_has_second_form():
    C = coeffs.wigner(12)
    rows = experiments.tail_empirics(C, RADEMACHER, 0.5, 1000, [0.0, 2.0], seed=4)
    assert "bound_value_var" in rows[0]
    assert rows[0]["bound_value_var"] == 1.0  # t = 0
    with pytest.raises(ParameterError):
        experiments.tail_empirics(C, GAUSSIAN, 0.5, 100, [0.0], seed=4)


def test_semicircle_cdf_endpoints():
    assert experiments.semicircle_cdf(-2.0) == pytest.approx(0.0, abs=1e-12)
    assert experiments.semicircle_cdf(2.0) == pytest.approx(1.0, abs=1e-12)
    assert experiments.semicircle_cdf(0.0) == pytest.approx(0.5)
    # clamps outside the support
    assert experiments.semicircle_cdf(-5.0) == pytest.approx(0.0, abs=1e-12)


def test_spectral_density_check_small_band():
    C = coeffs.band_cyclic(512, 16)
    ks = experiments.spectral_density_check(C, GAUSSIAN, seed=0)
    assert 0.0 < ks < 0.1


def test_spectral_density_check_requires_equal_degrees():
    with pytest.raises(ParameterError):
        experiments.spectral_density_check(coeffs.band(64, 2), GAUSSIAN, seed=0)


def test_spectral_density_full_wigner():
    # the k = n case is the classical full-matrix semicircle
    ks = experiments.spectral_density_check(coeffs.wigner(1024), GAUSSIAN, seed=1)
    assert ks <= 0.05


def test_block_norm_fast_path_matches_generic():
    C = coeffs.block_diagonal(64, 4)
    X = sample_matrix(C, GAUSSIAN, SeedSpec(7, 0))
    from specbound.specnorm import spectral_norm

    fast = experiments._block_norms(X, 16, 4)
    assert fast == pytest.approx(spectral_norm(X, tol=1e-10).value, rel=1e-9)


def test_seginer_block_experiment_small():
    rows = experiments.seginer_block_experiment([256, 512], RADEMACHER, 20, seed=8)
    for row in rows:
        assert row["n"] % row["k"] == 0
        assert 0.3 <= row["ratio_mean"] <= 3.5
    assert rows[0]["k"] == math.ceil(math.sqrt(math.log(256)))


def test_block_full_matrix_degenerates_to_wigner():
    # a single all-ones block is exactly the wigner pattern, so the MC
    # estimates coincide draw for draw
    a = experiments.estimate_expected_norm(coeffs.block_diagonal(16, 16), GAUSSIAN, 10, seed=3)
    b = experiments.estimate_expected_norm(coeffs.wigner(16), GAUSSIAN, 10, seed=3)
    assert a.mean == b.mean


def test_bounds_vs_empirical_report_wigner():
    rep = experiments.bounds_vs_empirical_report(
        coeffs.wigner(48), GAUSSIAN, 0.25, trials=60, seed=10
    )
    assert rep["ok"], rep["failures"]
    assert rep["lower_estimate"] <= rep["mc_norm_mean"] + 3 * (
        rep["lower_stderr"] + rep["mc_norm_stderr"]
    )
    assert rep["mc_norm_mean"] <= rep["upper_bounds"]["main"]["value"]
    # the column-norm diagnostic is reported but stays unasserted
    assert rep["column_ratio_diagnostic"] >= 1.0
    assert "seginer" in rep["upper_bounds"]
    assert "rademacher" not in rep["upper_bounds"]


def test_bounds_vs_empirical_report_rademacher_includes_split_bound():
    rep = experiments.bounds_vs_empirical_report(
        coeffs.diagonal(32), RADEMACHER, 0.25, trials=40, seed=11
    )
    assert rep["upper_bounds"]["rademacher"]["value"] == 1.0
