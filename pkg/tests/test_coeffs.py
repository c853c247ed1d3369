import math

import numpy as np
import pytest

from specbound import coeffs
from specbound.errors import DataError, ParameterError


def test_band_7_1_is_tridiagonal():
    C = coeffs.band(7, 1)
    a = C.toarray()
    for i in range(7):
        for j in range(7):
            assert a[i, j] == (1.0 if abs(i - j) <= 1 else 0.0)
    # middle rows carry three ones
    assert np.count_nonzero(a[3]) == 3


def test_wigner_3_is_all_ones():
    assert np.array_equal(coeffs.wigner(3).toarray(), np.ones((3, 3)))


def test_single_entry_has_one_nonzero():
    C = coeffs.single_entry(100)
    assert C.nnz == 1
    assert C.toarray()[0, 0] == 1.0


def test_block_diagonal_layout():
    a = coeffs.block_diagonal(6, 2).toarray()
    expected = np.zeros((6, 6))
    for b in range(3):
        expected[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = 1.0
    assert np.array_equal(a, expected)


def test_block_diagonal_full_block_is_wigner():
    assert np.array_equal(
        coeffs.block_diagonal(8, 8).toarray(), coeffs.wigner(8).toarray()
    )


def test_log_decay_diagonal_values():
    C = coeffs.log_decay_diagonal(10)
    a = C.toarray()
    assert a[0, 0] == 1.0
    assert a[1, 1] == 1.0  # 1/sqrt(log 2) > 1 is capped
    for i in range(3, 11):
        assert a[i - 1, i - 1] == pytest.approx(1.0 / math.sqrt(math.log(i)))
    assert coeffs.structural_params(C).sigma_star == 1.0


def test_band_cyclic_exact_degree():
    C = coeffs.band_cyclic(50, 3)
    counts = np.count_nonzero(C.toarray(), axis=1)
    assert np.all(counts == 7)


@pytest.mark.parametrize(
    "builder,args",
    [
        (coeffs.band, (7, 7)),
        (coeffs.band, (7, -1)),
        (coeffs.block_diagonal, (10, 3)),
        (coeffs.wigner, (0,)),
        (coeffs.band_cyclic, (5, 3)),
    ],
)
def test_invalid_dimensions_raise(builder, args):
    with pytest.raises(ParameterError):
        builder(*args)


def test_build_pattern_dispatch():
    assert coeffs.build_pattern("band", [7, 1]).nnz == 19
    with pytest.raises(ParameterError):
        coeffs.build_pattern("unknown_thing", [3])


def test_sparse_storage_threshold():
    assert coeffs.band(1000, 3).is_sparse       # fill 0.7%
    assert not coeffs.wigner(50).is_sparse      # full
    assert coeffs.diagonal(100).is_sparse
    assert not coeffs.diagonal(10).is_sparse    # 10% fill stays dense


def test_entries_are_immutable():
    dense = coeffs.wigner(4)
    with pytest.raises(ValueError):
        dense.data[0, 0] = 2.0
    sparse = coeffs.band(1000, 2)
    with pytest.raises(ValueError):
        sparse.data.data[0] = 2.0


def test_structural_params_examples():
    p = coeffs.structural_params(coeffs.wigner(9))
    assert p.sigma == 3.0 and p.sigma_star == 1.0
    p = coeffs.structural_params(coeffs.band(7, 1))
    assert p.sigma == pytest.approx(math.sqrt(3.0))
    assert p.sigma_star == 1.0
    zero = coeffs.CoefficientMatrix(np.zeros((4, 4)), "symmetric")
    p = coeffs.structural_params(zero)
    assert p.sigma == 0.0 and p.sigma_star == 0.0


def test_structural_params_rectangular():
    C = coeffs.CoefficientMatrix(np.ones((4, 10000)), "rectangular")
    p = coeffs.structural_params(C)
    assert p.sigma1 == pytest.approx(100.0)
    assert p.sigma2 == pytest.approx(2.0)
    assert p.sigma_star == 1.0


def test_lp_norm_examples():
    assert coeffs.lp_entrywise_norm(coeffs.diagonal(2), 1.0) == pytest.approx(2.0)
    assert coeffs.lp_entrywise_norm(coeffs.diagonal(9), 2.0) == pytest.approx(3.0)
    assert coeffs.lp_entrywise_norm(coeffs.wigner(3), 1.0) == pytest.approx(9.0)
    with pytest.raises(ParameterError):
        coeffs.lp_entrywise_norm(coeffs.wigner(3), 0.5)


def test_lp_norm_nonincreasing_in_p():
    rng = np.random.default_rng(3)
    a = rng.uniform(0, 1, (6, 6))
    a = np.triu(a) + np.triu(a, 1).T  # sigma_star <= 1
    C = coeffs.CoefficientMatrix(a, "symmetric")
    ps = [1.0, 1.2, 1.5, 1.8, 1.99, 2.5, 4.0]
    vals = [coeffs.lp_entrywise_norm(C, p) for p in ps]
    assert all(vals[i] >= vals[i + 1] - 1e-12 for i in range(len(vals) - 1))


def test_large_entry_count_examples():
    assert coeffs.large_entry_count(coeffs.wigner(4), 1.0) == 16
    assert coeffs.large_entry_count(coeffs.band(7, 1), 1.0) == 19
    assert coeffs.large_entry_count(coeffs.diagonal(5), 0.5) == 5
    zero = coeffs.CoefficientMatrix(np.zeros((3, 3)), "symmetric")
    with pytest.raises(ParameterError):
        coeffs.large_entry_count(zero, 1.0)


def test_lower_bound_applicable_examples():
    assert coeffs.lower_bound_applicable(coeffs.band(1024, 8), 1.0, 1.0)
    assert not coeffs.lower_bound_applicable(coeffs.single_entry(1024), 1.0, 1.0)
    assert coeffs.lower_bound_applicable(coeffs.wigner(16), 1.0, 2.0)  # 256 >= 256


def test_sigma_sandwich_invariants():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        a = rng.normal(size=(n, n))
        a = (a + a.T) / 2
        C = coeffs.CoefficientMatrix(a, "symmetric")
        p = coeffs.structural_params(C)
        assert p.sigma_star <= p.sigma + 1e-12
        assert p.sigma <= p.sigma_star * math.sqrt(n) + 1e-12
        assert p.sigma <= coeffs.lp_entrywise_norm(C, 2.0) + 1e-12


def test_params_invariant_under_permutation_and_sign_flips():
    rng = np.random.default_rng(12)
    a = rng.normal(size=(8, 8))
    a = (a + a.T) / 2
    C = coeffs.CoefficientMatrix(a, "symmetric")
    base = coeffs.structural_params(C)
    perm = rng.permutation(8)
    signs = rng.choice([-1.0, 1.0], size=(8, 8))
    signs = np.triu(signs) + np.triu(signs, 1).T
    variants = [a[np.ix_(perm, perm)], a * signs]
    for v in variants:
        p = coeffs.structural_params(coeffs.CoefficientMatrix(v, "symmetric"))
        assert p.sigma == pytest.approx(base.sigma)
        assert p.sigma_star == pytest.approx(base.sigma_star)


def test_band_and_block_sigma_squared():
    for n, k in [(9, 2), (64, 5), (200, 12)]:
        p = coeffs.structural_params(coeffs.band(n, k))
        assert p.sigma**2 == pytest.approx(2 * k + 1)
    for n, k in [(8, 2), (64, 8), (60, 5)]:
        p = coeffs.structural_params(coeffs.block_diagonal(n, k))
        assert p.sigma**2 == pytest.approx(k)


def test_asymmetric_construction_rejected():
    a = np.arange(9.0).reshape(3, 3)
    with pytest.raises(DataError):
        coeffs.CoefficientMatrix(a, "symmetric")
    with pytest.raises(DataError):
        coeffs.CoefficientMatrix(np.array([[np.nan]]), "symmetric")


def test_dense_csv_roundtrip(tmp_path):
    a = np.array([[1.0, 0.5], [0.5, 2.0]])
    path = tmp_path / "m.csv"
    coeffs.write_matrix_csv(a, path)
    C = coeffs.load_dense_csv(path, kind="symmetric")
    assert np.array_equal(C.toarray(), a)


def test_file_symmetry_tolerance(tmp_path):
    path = tmp_path / "near.csv"
    a = np.array([[1.0, 0.5], [0.5 + 1e-13, 2.0]])
    coeffs.write_matrix_csv(a, path)
    coeffs.load_dense_csv(path, kind="symmetric")  # inside 1e-12: accepted
    b = np.array([[1.0, 0.5], [0.5 + 1e-9, 2.0]])
    coeffs.write_matrix_csv(b, path)
    with pytest.raises(DataError):
        coeffs.load_dense_csv(path, kind="symmetric")  # not silently repaired


def test_sparse_csv_roundtrip_mirrors_lower_triangle(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("0,0,1.0\n0,2,-0.5\n1,1,2.0\n")
    C = coeffs.load_sparse_csv(path, kind="symmetric")
    a = C.toarray()
    assert a.shape == (3, 3)
    assert a[0, 2] == -0.5 and a[2, 0] == -0.5
    assert a[1, 1] == 2.0
    path.write_text("1,0,1.0\n")
    with pytest.raises(DataError):
        coeffs.load_sparse_csv(path, kind="symmetric")  # lower triangle forbidden


def test_from_adjacency_requires_symmetry(tmp_path):
    path = tmp_path / "adj.csv"
    path.write_text("0,1\n0,0\n")
    with pytest.raises(DataError):
        coeffs.build_pattern("from_adjacency", [str(path)])
    path.write_text("0,1\n1,0\n")
    C = coeffs.build_pattern("from_adjacency", [str(path)])
    assert C.kind == "symmetric" and C.nnz == 2


def test_write_sparse_matrix_csv(tmp_path):
    C = coeffs.band(100, 1)
    path = tmp_path / "band.csv"
    coeffs.write_matrix_csv(C.data, path, symmetric=True)
    back = coeffs.load_sparse_csv(path, kind="symmetric")
    assert np.array_equal(back.toarray(), C.toarray())
