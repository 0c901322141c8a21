"""Resonances, scattering determinants and resonance-counting constants for hyperbolic funnels."""
from .modes import Funnel, ModeContext, Model

__all__ = ["Funnel", "ModeContext", "Model"]
__version__ = "0.1.0"
