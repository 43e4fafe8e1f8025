"""Prediction and tolerance intervals for recruitment and related targets."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
