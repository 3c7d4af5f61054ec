"""Tikhonov regularization for nonlinear inverse learning in RKHS."""

from ._nlinv import *  # noqa: F401,F403
from ._nlinv import __version__  # noqa: F401
