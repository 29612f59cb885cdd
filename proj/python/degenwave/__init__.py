"""Pseudo-spectral 2.5D electron/Hall MHD laboratory with degenerating wave packets."""

from ._degenwave import *  # noqa: F401,F403
from ._degenwave import __version__  # noqa: F401
