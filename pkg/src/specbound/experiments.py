"""Monte Carlo studies: expected norms, the sparse phase transition,
tail empirics, the semicircle sanity check, and the block-diagonal example.

Trials are embarrassingly parallel.  Each trial owns a generator derived
from (master_seed, trial_index), per-trial values are stored by index, and
all reductions run over the stored array, so results are identical at any
thread count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bounds as bounds_mod
from . import coeffs as coeffs_mod
from .errors import NonConvergenceError, ParameterError
from .sampling import (
    NormEstimate,
    STREAM_PATTERN,
    SeedSpec,
    sample_matrix,
)
from .specnorm import EIG_DENSE_THRESHOLD, eigenvalues_all, max_row_norm, spectral_norm

K_RULE_NAMES = ("const", "c_log", "log_sq", "sqrt")
DEFAULT_NORM_TOL = 1e-4  # MC experiments relax the solver tolerance to 1e-4


def _run_trials(fn, trials, threads):
    """Evaluate fn(t) for t = 0..trials-1, results ordered by trial index."""
    if threads is None or threads <= 1:
        return [fn(t) for t in range(trials)]
    out = [None] * trials
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for t, val in zip(range(trials), pool.map(fn, range(trials))):
            out[t] = val
    return out


def estimate_expected_norm(C, dist, trials, seed, tol=DEFAULT_NORM_TOL, threads=1):
    """Monte Carlo estimate of E||X|| over independent trials."""
    if trials < 2:
        raise ParameterError("trials must be >= 2 for a standard error")

    def one(t):
        X = sample_matrix(C, dist, SeedSpec(seed, t))
        return spectral_norm(X, tol=tol).value

    try:
        values = _run_trials(one, trials, threads)
    except NonConvergenceError as exc:
        raise NonConvergenceError(
            f"norm estimation aborted: {exc}", best=exc.best
        ) from exc
    return NormEstimate.from_values(values, seed)


def regular_random_pattern(n, k, seed):
    """Symmetric 0/1 pattern with exactly k ones per row.

    Realized as a uniform-ish random simple k-regular graph (pairing model
    with rejection of multi-edges); requires n*k even and k < n.
    """
    import networkx as nx

    rng_seed = int(SeedSpec(seed, 0).generator(STREAM_PATTERN).integers(0, 2**32))
    try:
        g = nx.random_regular_graph(int(k), int(n), seed=rng_seed)
    except (nx.NetworkXError, ValueError) as exc:
        raise ParameterError(f"infeasible k-regular pattern (n={n}, k={k}): {exc}") from None
    rows, cols = [], []
    for a, b in g.edges():
        rows += [a, b]
        cols += [b, a]
    mat = sp.coo_array((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    if k >= coeffs_mod.SPARSE_FILL_THRESHOLD * n:
        mat = mat.toarray()
    return coeffs_mod.CoefficientMatrix(mat, "symmetric")


def resolve_k_rule(rule, n):
    """Map a k-rule spec ("const:3", "c_log:1.5", "log_sq", "sqrt") to k."""
    if isinstance(rule, (tuple, list)):
        name, param = rule[0], (rule[1] if len(rule) > 1 else None)
    else:
        name, _, param = str(rule).partition(":")
        param = float(param) if param else None
    if name not in K_RULE_NAMES:
        raise ParameterError(f"unknown k rule {name!r}; expected one of {K_RULE_NAMES}")
    if name == "const":
        if param is None:
            raise ParameterError("const rule needs a value, e.g. const:3")
        k = int(param)
    elif name == "c_log":
        if param is None:
            raise ParameterError("c_log rule needs a coefficient, e.g. c_log:1.5")
        k = max(1, round(param * math.log(n)))
    elif name == "log_sq":
        k = max(1, round(math.log(n) ** 2))
    else:
        k = max(1, round(math.sqrt(n)))
    label = name if param is None else f"{name}:{param:g}"
    return k, label


@dataclass
class PhaseGridResult:
    """Per-cell ratio estimates for the sparse phase transition scan."""

    rows: list = field(default_factory=list)  # dicts: n, k, ratio_mean, ...

    def write_csv(self, path):
        cols = ["n", "k", "ratio_mean", "ratio_stderr", "k_rule"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in self.rows:
                w.writerow([row["n"], row["k"], repr(row["ratio_mean"]), repr(row["ratio_stderr"]), row["k_rule"]])


def _max_row_degree(C):
    if C.is_sparse:
        a = C.data
        return int(np.diff(a.indptr).max())
    return int(np.count_nonzero(C.toarray(), axis=1).max())


def phase_scan(
    pattern,
    n_grid,
    k_rule,
    dist,
    trials,
    seed,
    tol=DEFAULT_NORM_TOL,
    threads=1,
    band_variant="cyclic",
):
    """||X||/sqrt(k) across a grid of (n, k(n)) cells.

    ``pattern`` is "band" (cyclic wrap by default, giving every row exactly
    2*floor((k-1)/2)+1 ones) or "regular_random" (exactly k ones per row).
    The ratio is normalized by the actual max row degree of the built
    pattern, and that degree is what the k column reports.
    """
    if pattern not in ("band", "regular_random"):
        raise ParameterError(f"pattern must be band or regular_random, got {pattern!r}")
    if band_variant not in ("cyclic", "truncated"):
        raise ParameterError(f"band_variant must be cyclic or truncated, got {band_variant!r}")
    result = PhaseGridResult()
    for cell, n in enumerate(n_grid):
        k, label = resolve_k_rule(k_rule, n)
        if k >= n:
            raise ParameterError(f"k rule gave k={k} >= n={n}")
        if pattern == "band":
            half = max(0, (k - 1) // 2)
            C = (coeffs_mod.band_cyclic if band_variant == "cyclic" else coeffs_mod.band)(n, half)
        else:
            C = regular_random_pattern(n, k, seed + cell)
        degree = _max_row_degree(C)
        root_k = math.sqrt(degree)

        def one(t, C=C, root_k=root_k, cell=cell):
            X = sample_matrix(C, dist, SeedSpec(seed, cell * trials + t))
            return spectral_norm(X, tol=tol).value / root_k

        ratios = np.asarray(_run_trials(one, trials, threads))
        result.rows.append(
            {
                "n": int(n),
                "k": degree,
                "ratio_mean": float(ratios.mean()),
                "ratio_stderr": float(ratios.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                "k_rule": label,
            }
        )
    return result


def tail_empirics(C, dist, epsilon, trials, t_grid, seed, tol=DEFAULT_NORM_TOL, threads=1):
    """Empirical survival P[||X|| >= threshold + t] against the analytic bounds.

    Rows carry the first-form bound (exp(-t^2/4 sigma_star^2) around the
    expected-norm bound); for uniformly bounded entry laws the
    variance-based second form (threshold (1+eps) 2 sigma_tilde) and its
    empirical survival are included as well.
    """
    if trials < 1000:
        raise ParameterError("tails need trials >= 1000 to be meaningful")
    shape = "symmetric" if C.kind == "symmetric" else "rectangular"

    def one(t):
        X = sample_matrix(C, dist, SeedSpec(seed, t))
        return spectral_norm(X, tol=tol).value

    norms = np.asarray(_run_trials(one, trials, threads))
    params = coeffs_mod.structural_params(C)
    bounded_sup = {"rademacher": 1.0, "bounded_uniform": math.sqrt(3.0)}.get(dist.family)
    rows = []
    for t in t_grid:
        threshold, prob = bounds_mod.tail_bound(C, shape, epsilon, t)
        row = {
            "t": float(t),
            "threshold": threshold,
            "empirical_survival": float(np.mean(norms >= threshold)),
            "bound_value": prob,
        }
        if bounded_sup is not None and shape == "symmetric":
            sigma_tilde = params.sigma  # unit-variance entries
            star_tilde = params.sigma_star * bounded_sup
            thr2 = (1.0 + epsilon) * 2.0 * sigma_tilde + t
            row["threshold_var"] = thr2
            row["empirical_survival_var"] = float(np.mean(norms >= thr2))
            row["bound_value_var"] = bounds_mod.tail_bound_second_form(
                C, epsilon, t, variant="bounded",
                sigma_tilde=sigma_tilde, sigma_star_tilde=star_tilde,
            )
        rows.append(row)
    return rows


def semicircle_cdf(x):
    """CDF of the semicircle law on [-2, 2]."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


def spectral_density_check(C, dist, seed):
    """KS distance between the spectrum of X/sqrt(k) and the semicircle law.

    Requires a pattern whose rows all have the same number k of nonzeros
    (the cyclic band qualifies) and n within the dense-spectrum cap; uses a
    single realization.
    """
    if C.kind != "symmetric":
        raise ParameterError("density check expects a symmetric pattern")
    if C.is_sparse:
        degrees = np.diff(C.data.indptr)
    else:
        degrees = np.count_nonzero(C.toarray(), axis=1)
    if degrees.size == 0 or degrees.min() != degrees.max():
        raise ParameterError("density check requires exactly k nonzeros in every row")
    k = int(degrees[0])
    if C.rows > EIG_DENSE_THRESHOLD:
        raise ParameterError(f"n={C.rows} exceeds the dense-spectrum cap {EIG_DENSE_THRESHOLD}")
    X = sample_matrix(C, dist, SeedSpec(seed, 0))
    lam = eigenvalues_all(X)[::-1] / math.sqrt(k)  # ascending
    F = semicircle_cdf(lam)
    i = np.arange(1, lam.size + 1, dtype=float)
    n = float(lam.size)
    ks = max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F)))
    return float(ks)


def _block_norms(X, nblocks, k):
    """Spectral norm of a block-diagonal sample via batched small eigh."""
    if sp.issparse(X):
        a = X.tocsr()
        counts = np.diff(a.indptr)
        if not np.all(counts == k):
            return None
        blocks = a.data.reshape(nblocks, k, k)
    else:
        arr = np.asarray(X)
        blocks = np.stack([arr[b * k : (b + 1) * k, b * k : (b + 1) * k] for b in range(nblocks)])
    w = np.linalg.eigvalsh(blocks)
    return float(np.abs(w).max())


def seginer_block_experiment(n_grid, dist, trials, seed, threads=1, tol=DEFAULT_NORM_TOL):
    """E||X|| / sqrt(log n) for block-diagonal patterns with k = ceil(sqrt(log n)).

    n is rounded to the nearest multiple of k.  The norm of each sample is
    the max over its diagonal blocks, computed by batched dense
    eigendecompositions of the k x k blocks.
    """
    rows = []
    for cell, n_req in enumerate(n_grid):
        k = max(1, math.ceil(math.sqrt(math.log(max(n_req, 2)))))
        nblocks = max(1, round(n_req / k))
        n = nblocks * k
        C = coeffs_mod.block_diagonal(n, k)

        def one(t, C=C, nblocks=nblocks, k=k, cell=cell):
            X = sample_matrix(C, dist, SeedSpec(seed, cell * trials + t))
            val = _block_norms(X, nblocks, k)
            if val is None:
                val = spectral_norm(X, tol=tol).value
            return val

        norms = np.asarray(_run_trials(one, trials, threads))
        denom = math.sqrt(math.log(n))
        rows.append(
            {
                "n_requested": int(n_req),
                "n": int(n),
                "k": int(k),
                "ratio_mean": float(norms.mean() / denom),
                "ratio_stderr": float(norms.std(ddof=1) / math.sqrt(trials) / denom) if trials > 1 else 0.0,
            }
        )
    return rows


def bounds_vs_empirical_report(C, dist, epsilon, trials, seed, tol=DEFAULT_NORM_TOL, threads=1):
    """Lower estimate, MC norm, diagnostic column ratio, and all upper bounds.

    Asserted (as report flags, not exceptions): the structural lower value
    sits below the MC mean, and the MC mean stays below the explicit-
    constant upper bound.  The max-column-norm ratio is reported but never
    asserted; it corresponds to an open conjecture.
    """

    def one(t):
        X = sample_matrix(C, dist, SeedSpec(seed, t))
        return spectral_norm(X, tol=tol).value, max_row_norm(X)

    pairs = _run_trials(one, trials, threads)
    norms = np.asarray([p[0] for p in pairs])
    maxrows = np.asarray([p[1] for p in pairs])
    norm_est = NormEstimate.from_values(norms, seed)
    maxrow_est = NormEstimate.from_values(maxrows, seed)
    lower = bounds_mod.lower_bound_estimate(C, trials, seed)

    upper = {}
    if C.kind == "symmetric":
        upper["main"] = bounds_mod.bound_main(C, epsilon)
        upper["nck"] = bounds_mod.bound_reference(C, "nck")
        upper["gordon"] = bounds_mod.bound_reference(C, "gordon")
        upper["dimfree"] = bounds_mod.bound_dimfree(C, 1.0)
        if C.rows >= 2:
            upper["seginer"] = bounds_mod.bound_seginer(C)
        if dist.family == "rademacher":
            upper["rademacher"] = bounds_mod.bound_rademacher(C, epsilon)
    else:
        upper["rect"] = bounds_mod.bound_rect(C, epsilon)
        upper["dimfree"] = bounds_mod.bound_dimfree(C, 1.0)

    failures = []
    combined_se = math.hypot(lower.std_error, norm_est.std_error)
    if lower.mean > norm_est.mean + 3.0 * combined_se:
        failures.append(
            f"lower estimate {lower.mean:.6g} exceeds MC mean {norm_est.mean:.6g} "
            f"+ 3*stderr {3 * combined_se:.3g}"
        )
    for name, rep in upper.items():
        if rep.constant_mode == bounds_mod.EXPLICIT:
            if norm_est.mean + 3.0 * norm_est.std_error > rep.value:
                failures.append(
                    f"MC mean {norm_est.mean:.6g} + 3*stderr exceeds explicit bound "
                    f"{name} = {rep.value:.6g}"
                )

    return {
        "n": C.rows,
        "m": C.cols,
        "distribution": dist.family,
        "epsilon": epsilon,
        "trials": trials,
        "seed": seed,
        "lower_estimate": lower.mean,
        "lower_stderr": lower.std_error,
        "mc_norm_mean": norm_est.mean,
        "mc_norm_stderr": norm_est.std_error,
        "mc_max_col_norm_mean": maxrow_est.mean,
        "column_ratio_diagnostic": (
            norm_est.mean / maxrow_est.mean if maxrow_est.mean > 0 else math.nan
        ),
        "upper_bounds": {name: rep.to_json() for name, rep in upper.items()},
        "failures": failures,
        "ok": not failures,
    }


def write_rows_csv(rows, path):
    """Write a list of flat dicts as CSV with a stable header order."""
    if not rows:
        raise ParameterError("no rows to write")
    cols = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in cols)])
