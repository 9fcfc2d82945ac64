"""Standard and bias-corrected K-fold cross-validation for stable learners."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
