"""blbkit: estimator quality assessment on large datasets.

Implements the bag of little bootstraps alongside the classical
bootstrap, the b-out-of-n bootstrap, and subsampling, with adaptive
hyperparameter selection and a synthetic ground-truth evaluation
harness. See README.md for usage.
"""

__version__ = "0.1.0"

from .adaptive import SelectionReport, SummarySeries, has_converged, run_blb_adaptive
from .errors import (
    BlbkitError,
    EstimationError,
    IngestError,
    SamplingError,
    ValidationError,
)
from .estimators import EstimatorSpec, estimate, estimate_full
from .metrics import MetricSpec, average, ci_widths, correct_for_size, summarize
from .model import (
    AdaptiveParams,
    DataMatrix,
    EstimateEnsemble,
    IndexSubset,
    ProcedureConfig,
    QualitySummary,
    WeightedSample,
    validate,
)
from .procedures import (
    Trajectory,
    TrajectoryStep,
    run_blb,
    run_bofn,
    run_bootstrap,
    run_subsampling,
)
from .resample import (
    RngStream,
    draw_multinomial_counts,
    draw_partition,
    draw_poisson_counts,
    draw_subset,
    resample_classical,
    resample_weighted,
)
from .simbench import (
    DataGeneratingSpec,
    ExperimentReport,
    GridReport,
    GroundTruth,
    ProcedureSetup,
    compute_ground_truth,
    generate,
    relative_error,
    run_experiment,
    run_grid,
)

__all__ = [
    "__version__",
    "AdaptiveParams",
    "BlbkitError",
    "DataGeneratingSpec",
    "DataMatrix",
    "EstimateEnsemble",
    "EstimationError",
    "EstimatorSpec",
    "ExperimentReport",
    "GridReport",
    "GroundTruth",
    "IndexSubset",
    "IngestError",
    "MetricSpec",
    "ProcedureConfig",
    "ProcedureSetup",
    "QualitySummary",
    "RngStream",
    "SamplingError",
    "SelectionReport",
    "SummarySeries",
    "Trajectory",
    "TrajectoryStep",
    "ValidationError",
    "WeightedSample",
    "average",
    "ci_widths",
    "compute_ground_truth",
    "correct_for_size",
    "draw_multinomial_counts",
    "draw_partition",
    "draw_poisson_counts",
    "draw_subset",
    "estimate",
    "estimate_full",
    "generate",
    "has_converged",
    "relative_error",
    "resample_classical",
    "resample_weighted",
    "run_blb",
    "run_blb_adaptive",
    "run_bofn",
    "run_bootstrap",
    "run_experiment",
    "run_grid",
    "run_subsampling",
    "summarize",
    "validate",
]
