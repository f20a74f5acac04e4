"""Multi-view feature fusion and ensemble classification engine.

Consumes deep-feature bundles (or generates synthetic ones), trains a
softmax head and RBF/polynomial kernel SVMs per feature view, fuses
predictions by majority voting, and reports cross-validated metrics and
class activation maps.
"""

from .bundle import (
    BundleManifest,
    ClassLabel,
    FeatureBundle,
    FeatureView,
    FoldPlan,
    NormalizationStats,
    apply_normalizer,
    concatenate_views,
    fit_normalizer,
    load_bundle,
    read_matrix,
    save_bundle,
    stratified_kfold,
    write_matrix,
)
from .cam import (
    ActivationTensor,
    CamHeatmap,
    bilinear_upsample,
    compute_cam,
    export_heatmap,
    load_tensor,
    normalize_minmax,
    save_tensor,
)
from .errors import BundleError, ConfigError, ConvergenceError, FuselabError
from .fusion import FusionStrategy, VoterOutput, fuse_all_strategies, majority_vote
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    FoldSummary,
    KappaResult,
    accuracy,
    aggregate_folds,
    class_metrics,
    confusion,
    f1_score,
    kappa,
)
from .runner import ExperimentConfig, ExperimentResult, emit_reports, run_experiment
from .softmax import SgdConfig, SoftmaxModel, loss_and_gradient, predict_proba, train_softmax
from .svm import (
    BinarySvmModel,
    KernelSpec,
    MulticlassSvmModel,
    SmoConfig,
    brute_force_dual,
    kernel_eval,
    kernel_matrix,
    multiclass_predict,
    multiclass_train,
    smo_train,
)
from .synthetic import SyntheticSpec, SyntheticView, complementary_spec, generate_synthetic

__version__ = "0.1.0"
