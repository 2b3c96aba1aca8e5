"""Deep binarized photonic reservoir computing simulator."""

from ._photorc import *  # noqa: F401,F403
from ._photorc import __doc__  # noqa: F401

__version__ = "0.1.0"
