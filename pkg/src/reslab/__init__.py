"""Scattering resonances of half-line Schrodinger operators with Gevrey-2 potentials.

Three independent solvers (complex scaling, outgoing shooting and a
Birman-Schwinger determinant) share the potential catalog in
:mod:`reslab.gevrey` and the resonance tables in :mod:`reslab.resonance`.
"""

__version__ = "0.1.0"

from .errors import (AccuracyError, ConvergenceError, DomainError, FitError, NearResonanceError,  # noqa: E402
                     ParameterError, RepositionError, ResLabError)
from .resonance import Resonance, ResonanceSet, Window  # noqa: E402

__all__ = ["__version__", "ResLabError", "DomainError", "ParameterError", "FitError", "AccuracyError",
           "ConvergenceError", "NearResonanceError", "RepositionError", "Resonance", "ResonanceSet", "Window"]
