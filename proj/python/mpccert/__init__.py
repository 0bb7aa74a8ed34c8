"""MPC horizon certificates: closed-form bounds, LP certificates and the certification pipeline."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
