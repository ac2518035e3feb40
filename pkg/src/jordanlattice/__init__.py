"""Perturbed Jordan-block lattice operators around a real exceptional point.

The public surface is re-exported here; see the submodules for details.
"""

from .errors import (
    ClassificationError,
    DegenerateSpectrumError,
    DomainError,
    EigensolverError,
    GridResolutionError,
    JordanLatticeError,
    NonRealSpectrumError,
    NotPositiveDefiniteError,
    NumericalError,
    SingularFactorError,
)
from .metric import (
    EigenSystem,
    HermitizationResult,
    MetricSolution,
    eigensystem,
    factor_metric,
    hermitize,
    intertwiner_basis,
    left_eigenvectors,
    metric_from_weights,
)
from .model import (
    LatticeOperator,
    Word,
    all_words,
    build_operator,
    jordan_block,
    parse_word,
    word_from_index,
    word_index,
)
from .phase import (
    DefectivenessCertificate,
    PhaseTableRow,
    ReducedModel,
    classify_all_words,
    defectiveness,
    real_subspace_projector,
    reduced_hermitize,
)
from .pseudospectrum import (
    ComponentReport,
    GridSpec,
    ResolventField,
    bottleneck_levels,
    component_report,
    resolvent_field,
    sigma_min,
)
from .spectral import (
    Spectrum,
    SpectrumClassification,
    SweepResult,
    UnfoldingFit,
    char_poly_at,
    classify,
    eigenvalues,
    sweep,
    unfolding_fit,
)

__version__ = "0.1.0"
