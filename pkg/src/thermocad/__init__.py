"""Texture features and classification for masked grayscale thermograms.

The pipeline loads quantized grayscale images with optional ROI masks,
computes a 10-element texture descriptor (co-occurrence moments plus
run-length statistics in four directions), trains an SMO support vector
machine or Gaussian naive Bayes, and scores them with stratified
cross-validation: accuracy, precision, sensitivity, specificity, Youden
index and ROC AUC.
"""

from .classify import (
    ClassifierConfig,
    KernelConfig,
    NaiveBayesModel,
    SvmModel,
    kkt_violations,
    load_model,
    predict,
    predict_naive_bayes,
    predict_svm,
    save_model,
    train_naive_bayes,
    train_smo,
)
from .data import FINDING, LABELS, NORMAL, Dataset, FeatureVector
from .errors import (
    ConvergenceError,
    CrossValidationError,
    EmptyPairsError,
    EmptyRoiError,
    ImageFormatError,
    NormalizationError,
    ThermocadError,
)
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    Metrics,
    cross_validate,
    metrics,
    roc_auc,
    stratified_kfold,
)
from .imgio import GrayImage, load_image, load_mask, write_pgm
from .report import (
    FeatureTable,
    read_features,
    render_comparison,
    write_features,
)
from .texture import (
    DIRECTIONS,
    CooccurrenceMatrix,
    Offset,
    ProbabilityMatrix,
    RunLengthMatrix,
    cooccurrence,
    extract_features,
    gray_level_non_uniformity,
    moment,
    normalize_cooccurrence,
    run_length_matrix,
    run_percentage,
)

__version__ = "0.1.0"
