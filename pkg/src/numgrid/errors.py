"""Exception hierarchy shared by the pipeline, classifiers and harness."""


class NumgridError(Exception):
    """Base class for data and model errors (CLI exit code 2)."""


class BlankInputError(NumgridError):
    """The image holds no ink where some is required."""


class DegenerateImageError(BlankInputError):
    """Constant-intensity image: no threshold separates two classes."""


class InsufficientDataError(NumgridError):
    """Too few samples (or classes) to estimate the requested model."""


class DegenerateClassError(NumgridError):
    """Covariance stays singular even at the largest ridge allowed."""


class InvalidSampleError(NumgridError):
    """Feature vector with non-finite values or the wrong length."""


class DatasetStructureError(NumgridError):
    """Dataset tree does not follow the 0..9 folder layout."""


class ModelFormatError(NumgridError):
    """Model file cannot be parsed or has an unsupported version."""


class TooManySkippedError(NumgridError):
    """More than the tolerated fraction of a class failed to process."""
