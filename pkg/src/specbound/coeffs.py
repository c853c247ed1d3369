"""Coefficient patterns (b_ij) and their structural parameters.

A CoefficientMatrix holds the deterministic scalars that multiply the random
entries.  Patterns below a 5% fill are kept in CSR form so that band matrices
at n = 1e5 stay affordable; everything else is a read-only dense array.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError, ParameterError

SPARSE_FILL_THRESHOLD = 0.05
FILE_SYMMETRY_TOL = 1e-12

PATTERN_NAMES = (
    "wigner",
    "diagonal",
    "band",
    "band_cyclic",
    "block_diagonal",
    "single_entry",
    "log_decay_diagonal",
    "from_adjacency",
)


@dataclass(frozen=True)
class StructuralParams:
    """Row/column Euclidean norms and the uniform parameter of a pattern.

    sigma is the largest row norm, sigma_star the largest |b_ij|; sigma1 and
    sigma2 are the row and column versions for rectangular patterns (all
    three coincide with sigma for symmetric ones).
    """

    sigma: float
    sigma_star: float
    sigma1: float
    sigma2: float


class CoefficientMatrix:
    """Immutable coefficient pattern, symmetric or rectangular."""

    def __init__(self, entries, kind, sym_tol=0.0):
        if kind not in ("symmetric", "rectangular"):
            raise ParameterError(f"unknown kind {kind!r}")
        if sp.issparse(entries):
            data = entries.tocsr()
            data.sum_duplicates()
            data.sort_indices()
            values = data.data
        else:
            data = np.asarray(entries, dtype=float)
            if data.ndim != 2:
                raise DataError("entries must be a 2-d array")
            values = data
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ParameterError("dimensions must be >= 1")
        if values.size and not np.all(np.isfinite(values)):
            raise DataError("entries must be finite")
        if kind == "symmetric":
            n, m = data.shape
            if n != m:
                raise ParameterError("symmetric pattern must be square")
            if sp.issparse(data):
                asym = abs(data - data.T)
                gap = asym.data.max() if asym.nnz else 0.0
            else:
                gap = np.abs(data - data.T).max() if n else 0.0
            if gap > sym_tol:
                raise DataError(
                    f"pattern is not symmetric (max asymmetry {gap:g} > tol {sym_tol:g})"
                )
        if isinstance(data, np.ndarray):
            data = data.copy()
            data.setflags(write=False)
        else:
            data.data.setflags(write=False)
        self._data = data
        self.kind = kind
        self.rows, self.cols = data.shape

    # -- basic accessors -------------------------------------------------

    @property
    def data(self):
        """Underlying ndarray or CSR array (read-only)."""
        return self._data

    @property
    def is_sparse(self):
        return sp.issparse(self._data)

    @property
    def nnz(self):
        if self.is_sparse:
            return int(np.count_nonzero(self._data.data))
        return int(np.count_nonzero(self._data))

    def toarray(self):
        if self.is_sparse:
            return self._data.toarray()
        return np.asarray(self._data)

    def absolute(self):
        """|b_ij| as a plain matrix of the same storage kind."""
        return abs(self._data)

    def upper_triangle(self):
        """(i, j, b_ij) of the upper triangle (i <= j), row-major order.

        Only defined for symmetric patterns; this fixed ordering is the
        contract the sampling module draws against.
        """
        if self.kind != "symmetric":
            raise ParameterError("upper_triangle is defined for symmetric patterns")
        if self.is_sparse:
            ut = sp.triu(self._data, k=0).tocoo()
            order = np.lexsort((ut.col, ut.row))
            return ut.row[order], ut.col[order], ut.data[order]
        i, j = np.triu_indices(self.rows)
        return i, j, np.asarray(self._data)[i, j]

    def nonzero_entries(self):
        """(i, j, b_ij) of all stored nonzeros in row-major order."""
        if self.is_sparse:
            coo = self._data.tocoo()
            order = np.lexsort((coo.col, coo.row))
            return coo.row[order], coo.col[order], coo.data[order]
        i, j = np.nonzero(self._data)
        return i, j, np.asarray(self._data)[i, j]

    def __repr__(self):
        storage = "sparse" if self.is_sparse else "dense"
        return (
            f"CoefficientMatrix({self.rows}x{self.cols}, {self.kind}, "
            f"{storage}, nnz={self.nnz})"
        )


def _pack(rows, cols, vals, n, m, kind):
    """Store triples as CSR below the fill threshold, dense otherwise."""
    nnz = len(vals)
    mat = sp.coo_array((vals, (rows, cols)), shape=(n, m)).tocsr()
    if nnz < SPARSE_FILL_THRESHOLD * n * m:
        return CoefficientMatrix(mat, kind)
    return CoefficientMatrix(mat.toarray(), kind)


def _check_dim(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def wigner(n):
    """All-ones n x n symmetric pattern."""
    n = _check_dim(n)
    return CoefficientMatrix(np.ones((n, n)), "symmetric")


def diagonal(n):
    """Identity pattern."""
    n = _check_dim(n)
    idx = np.arange(n)
    return _pack(idx, idx, np.ones(n), n, n, "symmetric")


def band(n, k):
    """b_ij = 1 iff |i - j| <= k."""
    n = _check_dim(n)
    if not 0 <= k < n:
        raise ParameterError(f"band requires 0 <= k < n, got k={k}, n={n}")
    rows, cols = [], []
    idx = np.arange(n)
    for d in range(0, int(k) + 1):
        i = idx[: n - d]
        rows.append(i)
        cols.append(i + d)
        if d > 0:
            rows.append(i + d)
            cols.append(i)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    return _pack(r, c, np.ones(len(r)), n, n, "symmetric")


def band_cyclic(n, k):
    """Wrap-around band: b_ij = 1 iff |i - j| mod n <= k.

    Every row has exactly 2k + 1 ones, which is what the sparse-matrix phase
    transition statement assumes; requires 2k + 1 <= n so the wrapped
    diagonals do not collide.
    """
    n = _check_dim(n)
    if not 0 <= k < n or 2 * int(k) + 1 > n:
        raise ParameterError(f"band_cyclic requires 0 <= 2k+1 <= n, got k={k}, n={n}")
    rows, cols = [], []
    idx = np.arange(n)
    for d in range(0, int(k) + 1):
        j = (idx + d) % n
        rows.append(idx)
        cols.append(j)
        if d > 0:
            rows.append(j)
            cols.append(idx)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    return _pack(r, c, np.ones(len(r)), n, n, "symmetric")


def block_diagonal(n, k):
    """n/k diagonal blocks of all ones; k must divide n."""
    n = _check_dim(n)
    k = _check_dim(k)
    if n % k != 0:
        raise ParameterError(f"block_diagonal requires k | n, got n={n}, k={k}")
    nblocks = n // k
    base = np.arange(k)
    i = np.repeat(base, k)
    j = np.tile(base, k)
    offs = np.repeat(np.arange(nblocks) * k, k * k)
    rows = offs + np.tile(i, nblocks)
    cols = offs + np.tile(j, nblocks)
    return _pack(rows, cols, np.ones(len(rows)), n, n, "symmetric")


def single_entry(n):
    """b_11 = 1, all other entries zero."""
    n = _check_dim(n)
    return _pack(np.array([0]), np.array([0]), np.ones(1), n, n, "symmetric")


def log_decay_diagonal(n):
    """Diagonal pattern b_ii = min(1, 1/sqrt(log i)).

    1/sqrt(log i) is undefined at i = 1 and exceeds 1 at i = 2, so both are
    capped at 1; this keeps sigma_star = 1 while preserving the slow decay
    of the rest of the diagonal.
    """
    n = _check_dim(n)
    i = np.arange(1, n + 1, dtype=float)
    vals = np.ones(n)
    if n > 1:
        vals[1:] = np.minimum(1.0, 1.0 / np.sqrt(np.log(i[1:])))
    idx = np.arange(n)
    return _pack(idx, idx, vals, n, n, "symmetric")


def from_adjacency(path):
    """Load a symmetric pattern from a dense CSV matrix file."""
    return load_dense_csv(path, kind="symmetric")


def build_pattern(kind, params=()):
    """Build a named pattern; ``params`` holds its integer arguments."""
    builders = {
        "wigner": wigner,
        "diagonal": diagonal,
        "band": band,
        "band_cyclic": band_cyclic,
        "block_diagonal": block_diagonal,
        "single_entry": single_entry,
        "log_decay_diagonal": log_decay_diagonal,
        "from_adjacency": from_adjacency,
    }
    if kind not in builders:
        raise ParameterError(
            f"unknown pattern {kind!r}; expected one of {', '.join(PATTERN_NAMES)}"
        )
    if kind == "from_adjacency":
        return from_adjacency(*params)
    return builders[kind](*[int(p) for p in params])


# -- structural parameters --------------------------------------------------


def _row_col_sumsq(C):
    if C.is_sparse:
        sq = C.data.multiply(C.data)
        row = np.asarray(sq.sum(axis=1)).ravel()
        col = np.asarray(sq.sum(axis=0)).ravel()
    else:
        a = np.asarray(C.data)
        sq = a * a
        row = sq.sum(axis=1)
        col = sq.sum(axis=0)
    return row, col


def structural_params(C):
    """sigma, sigma_star, sigma1, sigma2 of a pattern."""
    row, col = _row_col_sumsq(C)
    sigma1 = math.sqrt(row.max()) if row.size else 0.0
    sigma2 = math.sqrt(col.max()) if col.size else 0.0
    if C.is_sparse:
        sigma_star = float(np.abs(C.data.data).max()) if C.data.nnz else 0.0
    else:
        sigma_star = float(np.abs(C.data).max()) if C.data.size else 0.0
    if C.kind == "symmetric":
        sigma = max(sigma1, sigma2)
        return StructuralParams(sigma, sigma_star, sigma, sigma)
    return StructuralParams(max(sigma1, sigma2), sigma_star, sigma1, sigma2)


def lp_entrywise_norm(C, p):
    """Entrywise l_p norm over all (i, j) pairs (both triangles counted)."""
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    vals = np.abs(C.data.data) if C.is_sparse else np.abs(np.asarray(C.data)).ravel()
    vals = vals[vals > 0]
    if vals.size == 0:
        return 0.0
    # factor out the max to keep the powers in range for large p
    top = vals.max()
    return float(top * (((vals / top) ** p).sum()) ** (1.0 / p))


def large_entry_count(C, c):
    """|{(i, j): |b_ij| >= c * sigma_star}| over ordered pairs."""
    if not 0 < c <= 1:
        raise ParameterError(f"c must lie in (0, 1], got {c}")
    params = structural_params(C)
    if params.sigma_star == 0:
        raise ParameterError("zero pattern: sigma_star = 0 makes the threshold degenerate")
    vals = np.abs(C.data.data) if C.is_sparse else np.abs(np.asarray(C.data)).ravel()
    return int(np.count_nonzero(vals >= c * params.sigma_star))


def lower_bound_applicable(C, c, alpha):
    """True iff the pattern has >= n^alpha entries of size c * sigma_star.

    When true the two-sided sharpness regime E||X|| ~ sigma + sigma_star
    sqrt(log n) applies.
    """
    if C.kind != "symmetric":
        raise ParameterError("lower_bound_applicable expects a symmetric pattern")
    if alpha <= 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    return large_entry_count(C, c) >= C.rows**alpha


# -- file input / output -----------------------------------------------------


def load_dense_csv(path, kind="rectangular"):
    """Dense CSV: n rows x m columns of numbers, no header."""
    rows = []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if not line:
                continue
            try:
                rows.append([float(x) for x in line])
            except ValueError as exc:
                raise DataError(f"non-numeric field in {path}: {exc}") from None
    if not rows:
        raise DataError(f"empty matrix file: {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DataError(f"ragged rows in {path}")
    arr = np.array(rows, dtype=float)
    return CoefficientMatrix(arr, kind, sym_tol=FILE_SYMMETRY_TOL)


def load_sparse_csv(path, kind="symmetric", shape=None):
    """Sparse CSV triples "i,j,value" (0-based).

    Symmetric files carry the upper triangle only; the lower triangle is
    mirrored on load.  Shape defaults to 1 + the largest index seen.
    """
    ri, ci, vals = [], [], []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if not line:
                continue
            if len(line) != 3:
                raise DataError(f"sparse file {path} must have rows 'i,j,value'")
            i, j, v = int(line[0]), int(line[1]), float(line[2])
            if i < 0 or j < 0:
                raise DataError("indices must be >= 0")
            if kind == "symmetric" and i > j:
                raise DataError("symmetric sparse file must store the upper triangle only")
            ri.append(i)
            ci.append(j)
            vals.append(v)
    if shape is None:
        top = max(max(ri, default=0), max(ci, default=0)) + 1
        shape = (top, top) if kind == "symmetric" else (max(ri, default=0) + 1, max(ci, default=0) + 1)
    n, m = shape
    if kind == "symmetric":
        extra = [(j, i, v) for i, j, v in zip(ri, ci, vals) if i != j]
        ri = ri + [e[0] for e in extra]
        ci = ci + [e[1] for e in extra]
        vals = vals + [e[2] for e in extra]
    return _pack(np.array(ri, dtype=int), np.array(ci, dtype=int), np.array(vals, dtype=float), n, m, kind)


def write_matrix_csv(M, path, symmetric=None):
    """Write a realized matrix in the package's CSV formats.

    Sparse matrices go out as triples (upper triangle only when symmetric);
    dense ones as a plain numeric grid.
    """
    if sp.issparse(M):
        if symmetric is None:
            symmetric = M.shape[0] == M.shape[1] and (abs(M - M.T)).nnz == 0
        coo = (sp.triu(M, k=0) if symmetric else M).tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                w.writerow([int(i), int(j), repr(float(v))])
    else:
        arr = np.asarray(M)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in arr:
                w.writerow([repr(float(v)) for v in row])
