"""KNN / SVM hybrid classification for handwritten digits."""

from .dataset import Dataset, LabeledImage, SplitSpec, load_csv, load_idx_dataset, take_split
from .features import GradientConfig, HogConfig, extract_gradient_features, extract_hog
from .hybrid import HybridConfig, HybridReport, hybrid_classify, knn_classify
from .metrics import k_nearest, pairwise_distances
from .svm import SvmTrainConfig, smo_train, train_multiclass, predict_multiclass

__all__ = [
    "Dataset", "LabeledImage", "SplitSpec", "load_csv", "load_idx_dataset", "take_split",
    "GradientConfig", "HogConfig", "extract_gradient_features", "extract_hog",
    "HybridConfig", "HybridReport", "hybrid_classify", "knn_classify",
    "k_nearest", "pairwise_distances",
    "SvmTrainConfig", "smo_train", "train_multiclass", "predict_multiclass",
]

__version__ = "0.1.0"
