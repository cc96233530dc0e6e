"""Networks whose parameters are set by hand to compute closed-form functions.

Every builder returns a :class:`~softexp.network.Network` in which each
unit is a soft exponential with ``alpha`` chosen from ``-1`` (log), ``0``
(identity), ``1`` (exp) or ``i*w`` (sinusoid).  Inputs that would take the
log of a non-positive number are rejected in ``REAL_STRICT`` mode and
handled by the principal logarithm in ``COMPLEX_PRINCIPAL`` mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from softexp.network import Layer, Network, Projection

LOG, IDENTITY, EXP = -1.0, 0.0, 1.0

RBF_SOURCES = ("inner-product", "sq-distance")


@dataclass
class BuilderSpec:
    """Parameters accepted by :func:`build`; only the fields of ``kind`` are used."""

    kind: str
    n: int = 1
    coeffs: list[float] = field(default_factory=list)
    r: float = 1.0
    source: str = "sq-distance"
    freqs: list[float] = field(default_factory=list)
    sin_coeffs: list[float] = field(default_factory=list)
    cos_coeffs: list[float] = field(default_factory=list)
    offset: float = 0.0


def _layer(weights, alpha, bias=None, projection=Projection.NONE) -> Layer:
    weights = np.atleast_2d(np.asarray(weights, dtype=np.complex128))
    alphas = np.full(weights.shape[0], alpha, dtype=np.complex128)
    return Layer(weights, bias, alphas, projection)


def _project_output(net: Network, project: bool) -> Network:
    if project:
        net.layers[-1].projection = Projection.REAL_PART
    return net


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"vector dimension must be a positive integer, got {n!r}")
    return int(n)


def build_inner_product(n: int, project_output: bool = True) -> Network:
    """``p . q`` for inputs laid out as ``(p_1..p_n, q_1..q_n)``.

    log every input, exp the pairwise sums of logs, then add.
    """
    n = _check_n(n)
    pair = np.hstack([np.eye(n), np.eye(n)])
    net = Network(
        2 * n,
        [
            _layer(np.eye(2 * n), LOG),
            _layer(pair, EXP),
            _layer(np.ones((1, n)), IDENTITY),
        ],
    )
    return _project_output(net, project_output)


def _squared_distance_layers(n: int) -> list[Layer]:
    diff = np.hstack([np.eye(n), -np.eye(n)])
    return [
        _layer(diff, IDENTITY),
        _layer(np.eye(n), LOG),
        # exp(2 log d) = d**2
        _layer(2.0 * np.eye(n), EXP),
    ]


def build_squared_distance(n: int, project_output: bool = True) -> Network:
    """``sum((p - q)**2)`` for inputs ``(p_1..p_n, q_1..q_n)``."""
    n = _check_n(n)
    net = Network(2 * n, _squared_distance_layers(n) + [_layer(np.ones((1, n)), IDENTITY)])
    return _project_output(net, project_output)


def build_euclidean_distance(n: int, project_output: bool = True) -> Network:
    """``||p - q||``: the squared distance, logged, then ``exp(0.5 * log s)``."""
    n = _check_n(n)
    net = Network(
        2 * n,
        _squared_distance_layers(n)
        + [_layer(np.ones((1, n)), LOG), _layer([[0.5]], EXP)],
    )
    return _project_output(net, project_output)


def build_polynomial(coeffs, project_output: bool = True) -> Network:
    """``c_0 + c_1 x + ... + c_d x**d`` of a single input.

    Hidden unit ``k`` computes ``exp(k log x) = x**k``; a degree-0
    polynomial keeps one hidden unit with a zero outgoing weight.
    """
    coeffs = [float(c) for c in coeffs]
    if not coeffs:
        raise ValueError("polynomial needs at least one coefficient")
    powers = coeffs[1:] or [0.0]
    d = len(powers)
    net = Network(
        1,
        [
            _layer([[1.0]], LOG),
            _layer(np.arange(1, d + 1, dtype=float).reshape(d, 1), EXP),
            _layer([powers], IDENTITY, bias=[coeffs[0]]),
        ],
    )
    return _project_output(net, project_output)


def build_rbf(n: int, r: float, source: str = "sq-distance", project_output: bool = True) -> Network:
    """Gaussian response ``exp(-r * s)`` where ``s`` comes from ``source``.

    ``source`` is ``"inner-product"`` or ``"sq-distance"``; the source
    network gets one extra exp unit fed with weight ``-r``.
    """
    r = float(r)
    if not np.isfinite(r):
        raise ValueError(f"r must be finite, got {r!r}")
    if source == "inner-product":
        net = build_inner_product(n, project_output=False)
    elif source == "sq-distance":
        net = build_squared_distance(n, project_output=False)
    else:
        raise ValueError(f"unknown RBF source {source!r}; expected one of {RBF_SOURCES}")
    net.layers.append(_layer([[-r]], EXP))
    return _project_output(net, project_output)


def fourier_output_weights(freqs, sin_coeffs, cos_coeffs, offset):
    """Solve the output layer of :func:`build_fourier`.

    A unit with ``alpha = i*w`` emits ``sin(w x)/w`` on its real channel and
    ``w + (1 - cos(w x))/w`` on its imaginary channel.  Taking the real part
    of ``(u + i v) * h`` gives ``u Re(h) - v Im(h)``, so ``u = a*w`` and
    ``v = b*w`` leave ``a sin(w x) + b cos(w x) - b (w**2 + 1)``; the
    constant is folded into the bias.
    """
    w = np.asarray(freqs, dtype=float)
    a = np.asarray(sin_coeffs, dtype=float)
    b = np.asarray(cos_coeffs, dtype=float)
    weights = a * w + 1j * (b * w)
    bias = float(offset) + float(np.sum(b * (w * w + 1.0)))
    return weights, bias


def build_fourier(freqs, sin_coeffs, cos_coeffs, offset: float = 0.0) -> Network:
    """``offset + sum(a_k sin(w_k x) + b_k cos(w_k x))`` of a single input."""
    freqs = [float(w) for w in freqs]
    if not freqs:
        raise ValueError("at least one frequency is required")
    if any(w == 0.0 for w in freqs):
        raise ValueError("frequencies must be nonzero")
    if not (len(sin_coeffs) == len(cos_coeffs) == len(freqs)):
        raise ValueError("freqs, sin_coeffs and cos_coeffs must have equal lengths")
    m = len(freqs)
    hidden = Layer(np.ones((m, 1)), None, 1j * np.asarray(freqs), Projection.NONE)
    weights, bias = fourier_output_weights(freqs, sin_coeffs, cos_coeffs, offset)
    out = Layer(weights.reshape(1, m), [bias], [0.0], Projection.REAL_PART)
    return Network(1, [hidden, out])


def build(spec: BuilderSpec) -> Network:
    """Dispatch on ``spec.kind``."""
    kind = spec.kind
    if kind == "inner-product":
        return build_inner_product(spec.n)
    if kind == "sq-distance":
        return build_squared_distance(spec.n)
    if kind == "euclidean":
        return build_euclidean_distance(spec.n)
    if kind == "polynomial":
        return build_polynomial(spec.coeffs)
    if kind == "rbf":
        return build_rbf(spec.n, spec.r, spec.source)
    if kind == "fourier":
        return build_fourier(spec.freqs, spec.sin_coeffs, spec.cos_coeffs, spec.offset)
    raise ValueError(f"unknown network kind {kind!r}")
