"""Kinetic models of the rock-paper-scissors exchange game.

Thin Python surface over the C++ core: grids and density fields, the
whole-line and no-debt kinetic solvers with their analytic oracles, the
vanishing-wager limit models, and the particle-level game simulator.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
