"""Semi-supervised screenshot clustering with margin-based active learning."""

from .backend import HAS_COMPILED

__version__ = "0.1.0"

__all__ = ["HAS_COMPILED", "__version__"]
