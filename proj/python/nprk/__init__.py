"""Order conditions, tableaux and integrators for nonlinearly partitioned Runge-Kutta methods."""

from ._core import *  # noqa: F401,F403

__version__ = "1.0.0"
