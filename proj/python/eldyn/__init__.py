"""Hairs, ray tails and conjugacies of exponential-type entire maps."""

from ._eldyn import *  # noqa: F401,F403
from ._eldyn import __version__  # noqa: F401
