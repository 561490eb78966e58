"""Ground-state phase-diagram toolkit for two chirally coupled spin-1/2 chains."""

from .params import ModelParams, MomentumGrid, momentum_grid, validate

__version__ = "0.1.0"

__all__ = ["ModelParams", "MomentumGrid", "momentum_grid", "validate", "__version__"]
