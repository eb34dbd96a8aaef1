"""Expected maxima of Gaussian vectors and variance allocation solvers."""

from ._gaussalloc import *  # noqa: F401,F403
from ._gaussalloc import __doc__  # noqa: F401

__version__ = "0.1.0"
