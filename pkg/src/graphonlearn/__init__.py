"""Transfer operators, spectral clustering, and kernel reconstruction for
random-walk signals on graphons."""

from .clustering import ClusterModel, Embedding, GapResult, cluster_transitions, detect_gap, embed, kmeans
from .dictionaries import GaussianBasis, IndicatorBasis, basis_from_descriptor, make_gaussian, make_indicator
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DegeneracyError,
    DomainError,
    EmptyClusterError,
    GraphonLearnError,
    NumericError,
    ParseError,
    RankError,
    SingularMatrixError,
    SymmetryError,
)
from .estimators import GraphonSpectralClustering, TransferOperatorEDMD
from .graphons import (
    BUILTIN_GRAPHONS,
    ConnectednessReport,
    DegreeProfile,
    Graphon,
    InvariantDensity,
    TransitionDensity,
    bipartite,
    connectedness_probe,
    constant,
    degree_profile,
    invariant_density,
    make_graphon,
    quadruple_peak,
    row_scaled,
    transition_density,
    triple_peak,
    two_block,
)
from .operators import (
    CovarianceSet,
    KernelDensityEstimate,
    OperatorMatrices,
    SpectralModel,
    eigendecompose,
    empirical_covariances,
    galerkin_matrices,
    kde_density,
    laplacian_spectrum,
    pf_eigenfunctions,
    quadrature_covariances,
    singular_decompose,
)
from .reconstruction import (
    RankRModel,
    asymmetric_rank_r,
    negativity_report,
    reconstruct_p,
    reconstruct_p_asymmetric,
    reconstruct_p_symmetric,
    reconstruct_w,
    row_normalization_report,
    symmetric_rank_r,
)
from .sampling import PairedData, SdeConfig, Trajectory, lemon_slice_config, pairs, sde_walk, walk
from .signals import SignalSeries, ingest_signal

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
