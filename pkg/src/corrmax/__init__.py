"""corrmax: statistics of correlated Gaussian extremes for path-based
statistical static timing analysis.

Layers:

* ``normal``       scalar/vector standard-normal special functions
* ``gumbel``       limiting law of IID Gaussian maxima
* ``corrections``  corrected CDFs/PDFs for weakly correlated maxima
* ``montecarlo``   seeded, reproducible Monte Carlo oracle
* ``timing_graph`` DAG ingestion, path enumeration, path covariance
* ``cli``          scriptable command-line front end
"""
from __future__ import annotations

from .errors import (
    CorrmaxError,
    CycleError,
    DimensionMismatch,
    DomainError,
    DuplicateEdgeError,
    EmptyInput,
    GraphError,
    NotPsdError,
    ParseError,
    PathExplosionError,
)
from .normal import (
    erf,
    iid_normal_pdf,
    phi_kernel,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from .gumbel import (
    EULER_MASCHERONI,
    GumbelMoments,
    GumbelParams,
    gumbel_cdf,
    gumbel_moments,
    gumbel_pdf,
    iid_max_cdf,
    scaling_constants,
)
from .corrections import (
    CorrelationSum,
    EpsilonMatrix,
    ValidityReport,
    ar1_correlation_sum,
    ar1_epsilon,
    char_fn_identity_check,
    corrected_cdf,
    corrected_pdf,
    correlation_sum,
    correlated_pdf_first_order,
    validity_check,
)
from .montecarlo import (
    Ar1Model,
    McConfig,
    McResult,
    NonIidConfig,
    dkw_band_halfwidth,
    ecdf_values,
    empirical_stats,
    non_iid_experiment,
    rep_rng,
    sample_ar1_chain,
    sample_max_distribution,
    sample_multivariate_max,
)
from .timing_graph import (
    Edge,
    GraphAnalysis,
    PathCovariance,
    PathSet,
    TimingGraph,
    accumulated_delay_params,
    enumerate_paths,
    graph_delay_analysis,
    load_graph,
    normalize_source_sink,
    parse_graph,
    path_covariance,
)

__version__ = "0.1.0"
