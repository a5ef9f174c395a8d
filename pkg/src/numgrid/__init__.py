"""Handwritten numeral recognition from geometric features and Gaussian
discriminant classifiers combined by majority vote."""

from .classifier import DiscriminantModel, classify, classify_batch, fit, load_model, save_model, score
from .combiner import majority3, majority5
from .features import FEATURE_NAMES, FeatureVector, extract_features, extract_line_features, region_properties
from .imaging import PreprocessedNumeral, preprocess, read_image

__version__ = "0.1.0"

__all__ = [
    "DiscriminantModel",
    "FEATURE_NAMES",
    "FeatureVector",
    "PreprocessedNumeral",
    "classify",
    "classify_batch",
    "extract_features",
    "extract_line_features",
    "fit",
    "load_model",
    "majority3",
    "majority5",
    "preprocess",
    "read_image",
    "region_properties",
    "save_model",
    "score",
]
