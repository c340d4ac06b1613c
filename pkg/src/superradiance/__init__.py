"""Collective emission from two detuned emitters sharing a waveguide mode.

Modules
-------
core
    Basis, operators, Lindblad generator.
dynamics
    Spectral propagation, steady state, regression evolution.
observables
    Waveguide intensity, g2(tau), photon budget.
ensemble
    Spectral-wandering average and Gaussian timing jitter.
analysis
    Threshold decay times, beat periods, joint (gamma_d, sigma) fit.
oracle
    Independent operator-form integrator and closed forms.
"""

__version__ = "0.1.0"

from ._backend import COMPILED  # noqa: E402
from .core import HBAR_UEV_NS, SystemParams, build_liouvillian  # noqa: E402

__all__ = ["COMPILED", "HBAR_UEV_NS", "SystemParams", "build_liouvillian", "__version__"]
