"""leakbench: simulate and analyze leakage randomized benchmarking.

Registers of qutrits (qubit plus one leakage level per site) evolve under
random Pauli sequences with leakage damping noise; survival in the
computational record decays multi-exponentially, and the decay exponents
encode the noise's leakage and seepage rates independently of state
preparation and measurement errors.  The package provides the operator
algebra, the noise-model constructors, the experiment engines (exact and
shot-sampled), the closed-form spectral theory, and the decay-fitting
pipeline, plus a CLI for reproducible batch runs.
"""

__version__ = "0.1.0"

from . import fitpipe, gates, noise, presets, protocol, qspace, spam, theory

__all__ = [
    "__version__",
    "fitpipe",
    "gates",
    "noise",
    "presets",
    "protocol",
    "qspace",
    "spam",
    "theory",
]
