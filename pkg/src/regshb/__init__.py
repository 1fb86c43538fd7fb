"""Adaptive stochastic heavy ball methods for ill-posed systems of equations."""
from .errors import ConfigError, InputError

__version__ = "0.1.0"
__all__ = ["ConfigError", "InputError", "__version__"]
