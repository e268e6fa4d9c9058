"""Word-frequency features from news corpora, country peace classes, and a learned peace index."""

__version__ = "0.1.0"

from .errors import DataError, NumericError  # noqa: E402

__all__ = ["DataError", "NumericError", "__version__"]
