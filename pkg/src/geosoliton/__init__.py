"""Moving frames, spin models and soliton equations on periodic grids."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .spectral import Grid1D, Grid2D, random_field  # noqa: F401
