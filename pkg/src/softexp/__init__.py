"""Soft exponential activation: kernels, networks, exact builders and training."""

from softexp.activation import (
    Alpha,
    EvalMode,
    addmul,
    dsoftexp_dalpha,
    dsoftexp_dx,
    g_linexp,
    g_loglin,
    real_domain_lower_bound,
    softexp,
    softexp_complex,
)
from softexp.errors import (
    DivergenceError,
    DomainError,
    NetworkFormatError,
    NonFiniteInputError,
    RangeError,
    SoftExpError,
)
from softexp.network import (
    ForwardTrace,
    GradientSet,
    Layer,
    Network,
    Projection,
    backward,
    deserialize,
    forward,
    forward_traced,
    serialize,
    validate,
)

__version__ = "0.1.0"
