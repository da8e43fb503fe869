"""Leave-many-out feature selection for sparse short-text regression.

The pipeline ingests labeled posts, extracts sparse character/word
n-gram, engineered, and word-list features, scores every feature by the
average change in validation MSE its removal causes across many
randomized backward-removal runs, then sweeps ranked subsets to pick the
best-performing one for prediction.
"""

__version__ = "0.1.0"

from .dataset import Dataset, Instance, SplitSpec, load_dataset, save_dataset, split
from .features import (
    FeatureVocabulary,
    ResourceBundle,
    build_vocabulary,
    extract_matrix,
    load_resources,
    tokenize,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .lmo import (
    LmoConfig,
    RemovalRecord,
    RunSpec,
    ScoreTable,
    aggregate_scores,
    execute_run,
    plan_runs,
    run_lmo,
)
from .regression import RidgeModel, fit_ridge, mse, predict
from .sparse import CsrMatrix
from .sweep import (
    SubsetEvaluation,
    build_percent_subsets,
    default_fraction_grid,
    evaluate_subsets,
    impact_report,
    rank_features,
    select_best,
)

__all__ = [
    "CsrMatrix",
    "Dataset",
    "FeatureVocabulary",
    "Instance",
    "KERNEL_BACKEND",
    "LmoConfig",
    "RemovalRecord",
    "ResourceBundle",
    "RidgeModel",
    "RunSpec",
    "ScoreTable",
    "SplitSpec",
    "SubsetEvaluation",
    "aggregate_scores",
    "build_percent_subsets",
    "build_vocabulary",
    "default_fraction_grid",
    "evaluate_subsets",
    "execute_run",
    "extract_matrix",
    "fit_ridge",
    "impact_report",
    "load_dataset",
    "load_resources",
    "mse",
    "plan_runs",
    "predict",
    "rank_features",
    "run_lmo",
    "save_dataset",
    "select_best",
    "split",
    "tokenize",
]
