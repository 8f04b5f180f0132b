"""Kernels, simulators and verification checks for rebirthed Markov processes."""

from rebirthlab._core import *  # noqa: F401,F403
from rebirthlab._core import __version__  # noqa: F401
