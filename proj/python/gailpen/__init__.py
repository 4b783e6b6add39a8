"""Pen-trajectory imitation: explicit environment, convolutional networks,
adversarial training and the curvature evaluation protocol."""

from gailpen._core import *  # noqa: F401,F403
from gailpen._core import __version__  # noqa: F401
