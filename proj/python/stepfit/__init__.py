"""Learned eigenvalues of time-stepping schemes."""

from ._core import *  # noqa: F401,F403
from ._core import StepfitError, schemes

__all__ = [name for name in dir() if not name.startswith("_")]
