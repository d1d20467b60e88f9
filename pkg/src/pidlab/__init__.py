"""Attention as a controlled linear state-space system.

Submodules:

``kernel``     softmax kernels, matrix exponential, eigenvalues, Perron vectors
``dynamics``   autonomous / P / PD / PID token dynamics, integrators, closed forms
``control``    robustness, inverse-norm, stability and rank checks
``energy``     nonlocal energies, gradients, Bregman and PI updates
``network``    stacked PID attention layers and collapse metrics
``harness``    seeded experiments, CSV reports and the ``pidlab`` CLI
"""

from ._backend import COMPILED
from .dynamics import Mode, PIDGains, SSMConfig, Trajectory, integrate_ssm
from .errors import DivergenceError, InvalidInputError, NumericalFailure, PidlabError
from .kernel import QueryKeyPair, Spectrum, StochasticKernel, build_softmax_kernel

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "DivergenceError",
    "InvalidInputError",
    "Mode",
    "NumericalFailure",
    "PIDGains",
    "PidlabError",
    "QueryKeyPair",
    "SSMConfig",
    "Spectrum",
    "StochasticKernel",
    "Trajectory",
    "build_softmax_kernel",
    "integrate_ssm",
]
