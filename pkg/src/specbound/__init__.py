"""Sharp nonasymptotic spectral-norm bounds for random matrices with
independent entries: bound evaluation, exact trace-moment verification,
reproducible sampling, and Monte Carlo experiments.
"""

from .coeffs import (
    CoefficientMatrix,
    StructuralParams,
    band,
    band_cyclic,
    block_diagonal,
    build_pattern,
    diagonal,
    large_entry_count,
    log_decay_diagonal,
    lower_bound_applicable,
    lp_entrywise_norm,
    single_entry,
    structural_params,
    wigner,
)
from .bounds import (
    BoundReport,
    bound_bounded_entries,
    bound_dimfree,
    bound_heavy,
    bound_main,
    bound_rademacher,
    bound_rect,
    bound_reference,
    bound_seginer,
    bound_subgaussian,
    gaussian_moment_bounds,
    lower_bound_estimate,
    reference_tail_curves,
    tail_bound,
    tail_bound_second_form,
)
from .errors import (
    DataError,
    GuaranteeError,
    NonConvergenceError,
    ParameterError,
    SizeError,
)
from .moments import (
    BipartiteShape,
    CycleShape,
    enumerate_bipartite_shapes,
    enumerate_shapes,
    gaussian_moment,
    rect_trace_moment,
    shape_of,
    shape_weight_check,
    trace_moment_bruteforce,
    verify_comparison,
    wigner_trace_moment,
)
from .sampling import (
    EntryDistribution,
    GAUSSIAN,
    NormEstimate,
    RADEMACHER,
    SeedSpec,
    distribution_from_code,
    distribution_moment,
    sample_matrix,
    symmetrized_difference,
)
from .specnorm import NormResult, eigenvalues_all, max_row_norm, spectral_norm
from .experiments import (
    PhaseGridResult,
    bounds_vs_empirical_report,
    estimate_expected_norm,
    phase_scan,
    regular_random_pattern,
    seginer_block_experiment,
    semicircle_cdf,
    spectral_density_check,
    tail_empirics,
)

__version__ = "0.1.0"
