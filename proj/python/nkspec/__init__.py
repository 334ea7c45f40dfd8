"""Neural kernel spectra over the boolean cube, sphere and Gaussian."""

from ._nkspec import *  # noqa: F401,F403
from ._nkspec import __version__  # noqa: F401
