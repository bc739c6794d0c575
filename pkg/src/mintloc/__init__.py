"""Multipath-assisted indoor navigation and tracking (MINT) with UWB signals."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .constants import SPEED_OF_LIGHT

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "SPEED_OF_LIGHT", "__version__"]
