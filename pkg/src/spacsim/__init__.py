"""Truncated Fock-space simulation of heralded photon addition in cascaded
parametric amplifiers: W states in the idlers, photon-added coherent states in
the signal, entangled-coherent-state inputs and thermal noise."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    InvalidArgumentError,
    InvalidDimensionError,
    NormLeakageError,
    OutOfRangeError,
    PartialTraceRequiredError,
    ShapeError,
    SpacsimError,
    TruncationError,
)
from .fock import (  # noqa: E402
    CouplingParams,
    DensityMatrix,
    FockVector,
    ModeOperator,
    annihilation,
    apply,
    apply_dm,
    creation,
    displacement,
    laguerre,
    tensor,
    tensor_op,
)
