"""Feed-forward networks whose every unit is a soft exponential.

Each layer computes ``z = W a + b``, optionally keeps only the real part of
``z``, then applies ``f(alpha_j, z_j)`` per unit.  Weights, biases and
alphas are complex so that units with complex ``alpha`` can pass both of
their output channels forward.

Gradients are plain real partials with respect to the real and imaginary
coordinates of each parameter, packed as ``d/d(re) + 1j * d/d(im)``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from softexp.activation import Alpha, EvalMode, activate, activate_with_grads
from softexp.errors import DomainError, NetworkFormatError, RangeError, ShapeError

FORMAT_NAME = "softexp-network"
FORMAT_VERSION = 1


class Projection(enum.Enum):
    NONE = "none"
    REAL_PART = "real_part"


def _as_complex(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


@dataclass(eq=False)
class Layer:
    """One fully connected layer.

    ``weights`` has shape ``(out, in)``; ``bias`` and ``alphas`` have length
    ``out``.  Arrays are copied to ``complex128`` on construction.
    """

    weights: np.ndarray
    bias: np.ndarray | None = None
    alphas: np.ndarray | None = None
    projection: Projection = Projection.NONE

    def __post_init__(self):
        self.weights = _as_complex(self.weights, 2, "weights")
        n_out = self.weights.shape[0]
        self.bias = (
            np.zeros(n_out, np.complex128)
            if self.bias is None
            else _as_complex(self.bias, 1, "bias")
        )
        self.alphas = (
            np.zeros(n_out, np.complex128)
            if self.alphas is None
            else _as_complex(self.alphas, 1, "alphas")
        )
        self.projection = Projection(self.projection)

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    def alpha(self, unit: int) -> Alpha:
        return Alpha.of(self.alphas[unit])

    def copy(self) -> "Layer":
        return Layer(self.weights, self.bias, self.alphas, self.projection)


@dataclass(eq=False)
class Network:
    input_dim: int
    layers: list[Layer] = field(default_factory=list)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].n_out

    def copy(self) -> "Network":
        return Network(self.input_dim, [layer.copy() for layer in self.layers])

    def parameters(self):
        """Yield ``(layer_index, name, array)`` for every parameter array."""
        for k, layer in enumerate(self.layers):
            yield k, "weights", layer.weights
            yield k, "bias", layer.bias
            yield k, "alphas", layer.alphas


@dataclass
class ForwardTrace:
    """Values recorded by :func:`forward_traced`.

    ``pre_activations[k]`` is layer ``k``'s ``z`` after projection and
    ``activations[k]`` its output.  All arrays carry a leading batch axis.
    ``dz``/``dalpha`` hold the local activation derivatives when recorded
    for backpropagation.
    """

    inputs: np.ndarray
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]
    batched: bool = False
    dz: list[np.ndarray] | None = None
    dalpha: list[np.ndarray] | None = None

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1] if self.batched else self.activations[-1][0]


@dataclass
class LayerGradient:
    d_weights: np.ndarray
    d_bias: np.ndarray
    d_alpha: np.ndarray

    @property
    def d_alpha_re(self) -> np.ndarray:
        return self.d_alpha.real

    @property
    def d_alpha_im(self) -> np.ndarray:
        return self.d_alpha.imag


@dataclass
class GradientSet:
    layers: list[LayerGradient]

    def arrays(self):
        for k, g in enumerate(self.layers):
            yield k, "weights", g.d_weights
            yield k, "bias", g.d_bias
            yield k, "alphas", g.d_alpha


# --------------------------------------------------------------------------
# validation


def validate(net: Network) -> list[str]:
    """Return a list of invariant violations; an empty list means valid."""
    problems = []
    if not isinstance(net.input_dim, (int, np.integer)) or net.input_dim < 1:
        problems.append(f"input_dim must be a positive integer, got {net.input_dim!r}")
    if not net.layers:
        problems.append("network has no layers")
    width = net.input_dim
    for k, layer in enumerate(net.layers):
        w, b, a = layer.weights, layer.bias, layer.alphas
        if w.ndim != 2:
            problems.append(f"layers[{k}].weights is not a matrix")
            continue
        if w.shape[0] < 1:
            problems.append(f"layers[{k}] has no units")
        if w.shape[1] != width:
            problems.append(
                f"layers[{k}].weights has {w.shape[1]} columns, expected {width}"
            )
        if b.shape != (w.shape[0],):
            problems.append(f"layers[{k}].bias has length {b.size}, expected {w.shape[0]}")
        if a.shape != (w.shape[0],):
            problems.append(
                f"layers[{k}].alphas has length {a.size}, expected {w.shape[0]}"
            )
        for name, arr in (("weights", w), ("bias", b), ("alphas", a)):
            if not np.all(np.isfinite(arr)):
                problems.append(f"layers[{k}].{name} contains non-finite entries")
        width = w.shape[0]
    return problems


def _require_valid(net: Network):
    problems = validate(net)
    if problems:
        raise ShapeError("invalid network: " + "; ".join(problems))


# --------------------------------------------------------------------------
# forward / backward


def _batch(net: Network, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.complex128)
    batched = x.ndim == 2
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ShapeError(
            f"input has shape {np.shape(x)}, expected ({net.input_dim},) "
            f"or (batch, {net.input_dim})"
        )
    return x, batched


def _run(net, x, mode, want_grads):
    _require_valid(net)
    a, batched = _batch(net, x)
    inputs = a
    zs, acts, dzs, das = [], [], [], []
    for k, layer in enumerate(net.layers):
        z = a @ layer.weights.T + layer.bias
        if layer.projection is Projection.REAL_PART:
            z = z.real.astype(np.complex128)
        try:
            if want_grads:
                f, dz, da = activate_with_grads(layer.alphas, z, mode)
                dzs.append(dz)
                das.append(da)
            else:
                f = activate(layer.alphas, z, mode)
        except (DomainError, RangeError) as exc:
            raise type(exc)(f"layer {k}: {exc}") from None
        zs.append(z)
        acts.append(f)
        a = f
    if want_grads:
        return ForwardTrace(inputs, zs, acts, batched, dzs, das)
    return ForwardTrace(inputs, zs, acts, batched)


def forward(net: Network, x, mode: EvalMode = EvalMode.REAL_STRICT) -> np.ndarray:
    """Evaluate ``net`` on one input vector or a ``(batch, input_dim)`` array."""
    return _run(net, x, mode, want_grads=False).output


def forward_traced(net: Network, x, mode: EvalMode = EvalMode.REAL_STRICT):
    """Like :func:`forward`, also returning the :class:`ForwardTrace`."""
    trace = _run(net, x, mode, want_grads=True)
    return trace.output, trace


def backward(net: Network, trace: ForwardTrace, output_grad) -> GradientSet:
    """Backpropagate ``output_grad`` through a recorded forward pass.

    The result holds the partials of ``s = sum(Re(conj(g) * y))`` where ``g``
    is ``output_grad`` and ``y`` the network output, summed over the batch.
    Real output gradients therefore give ``s = sum(g * Re(y))``.
    """
    if trace.dz is None:
        raise ValueError("trace was not recorded with forward_traced")
    if len(trace.activations) != len(net.layers):
        raise ShapeError("trace has a different number of layers than the network")
    for layer, z in zip(net.layers, trace.pre_activations):
        if z.shape[1] != layer.n_out:
            raise ShapeError("trace does not match the network's layer widths")

    g = np.asarray(output_grad, dtype=np.complex128)
    expected = trace.activations[-1].shape
    if not trace.batched and g.ndim == 1:
        g = g[None, :]
    if g.shape != expected:
        raise ShapeError(f"output_grad has shape {g.shape}, expected {expected}")

    grads = [None] * len(net.layers)
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        # for holomorphic y = h(v) the (re, im) gradient pulls back as g * conj(h')
        d_alpha = (g * np.conj(trace.dalpha[k])).sum(axis=0)
        gz = g * np.conj(trace.dz[k])
        if layer.projection is Projection.REAL_PART:
            gz = gz.real.astype(np.complex128)
        prev = trace.activations[k - 1] if k > 0 else trace.inputs
        d_w = gz.T @ np.conj(prev)
        d_b = gz.sum(axis=0)
        grads[k] = LayerGradient(d_w, d_b, d_alpha)
        g = gz @ np.conj(layer.weights)
    return GradientSet(grads)


def composed_affine(net: Network) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(A, c)`` with ``x -> A x + c`` equal to ``net`` when all alphas are 0.

    Projections are ignored, so the result describes the network only when
    every intermediate value is real.
    """
    A = np.eye(net.input_dim, dtype=np.complex128)
    c = np.zeros(net.input_dim, dtype=np.complex128)
    for layer in net.layers:
        A = layer.weights @ A
        c = layer.weights @ c + layer.bias
    return A, c


# --------------------------------------------------------------------------
# serialization


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _pairs(arr) -> str:
    return "[" + ", ".join(f"[{_fmt(c.real)}, {_fmt(c.imag)}]" for c in arr) + "]"


def serialize(net: Network) -> str:
    """Render ``net`` as a JSON network document (17 significant digits)."""
    _require_valid(net)
    lines = [
        "{",
        f'  "format": "{FORMAT_NAME}",',
        f'  "version": {FORMAT_VERSION},',
        f'  "input_dim": {int(net.input_dim)},',
        '  "layers": [',
    ]
    for k, layer in enumerate(net.layers):
        rows = ",\n        ".join(_pairs(row) for row in layer.weights)
        lines += [
            "    {",
            f'      "projection": "{layer.projection.value}",',
            f'      "alphas": {_pairs(layer.alphas)},',
            f'      "bias": {_pairs(layer.bias)},',
            '      "weights": [',
            f"        {rows}",
            "      ]",
            "    }" + ("," if k < len(net.layers) - 1 else ""),
        ]
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def _parse_pairs(values, where: str) -> list[complex]:
    if not isinstance(values, list):
        raise NetworkFormatError(f"{where}: expected a list of [re, im] pairs")
    out = []
    for i, pair in enumerate(values):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, float) for v in pair)
        ):
            raise NetworkFormatError(f"{where}[{i}]: expected an [re, im] number pair")
        out.append(complex(pair[0], pair[1]))
    return out


def deserialize(text: str) -> Network:
    """Parse a network document produced by :func:`serialize`."""
    try:
        # parse_int=float keeps "-0" as -0.0
        doc = json.loads(text, parse_int=float)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise NetworkFormatError("document root must be an object")
    if doc.get("format", FORMAT_NAME) != FORMAT_NAME:
        raise NetworkFormatError(f"format: expected {FORMAT_NAME!r}, got {doc['format']!r}")
    dim = doc.get("input_dim")
    if not isinstance(dim, float) or dim != int(dim) or dim < 1:
        raise NetworkFormatError(f"input_dim: expected a positive integer, got {dim!r}")
    layers = doc.get("layers")
    if not isinstance(layers, list) or not layers:
        raise NetworkFormatError("layers: expected a non-empty list")

    parsed = []
    for k, spec in enumerate(layers):
        where = f"layers[{k}]"
        if not isinstance(spec, dict):
            raise NetworkFormatError(f"{where}: expected an object")
        for key in ("weights", "bias", "alphas"):
            if key not in spec:
                raise NetworkFormatError(f"{where}.{key}: missing")
        rows = spec["weights"]
        if not isinstance(rows, list) or not rows:
            raise NetworkFormatError(f"{where}.weights: expected a non-empty list of rows")
        weights = [_parse_pairs(r, f"{where}.weights[{i}]") for i, r in enumerate(rows)]
        if len({len(r) for r in weights}) != 1:
            raise NetworkFormatError(f"{where}.weights: rows have different lengths")
        try:
            projection = Projection(spec.get("projection", "none"))
        except ValueError:
            raise NetworkFormatError(
                f"{where}.projection: expected 'none' or 'real_part', "
                f"got {spec.get('projection')!r}"
            ) from None
        parsed.append(
            Layer(
                np.array(weights, dtype=np.complex128).reshape(len(weights), -1),
                _parse_pairs(spec["bias"], f"{where}.bias"),
                _parse_pairs(spec["alphas"], f"{where}.alphas"),
                projection,
            )
        )
    net = Network(int(dim), parsed)
    problems = validate(net)
    if problems:
        raise NetworkFormatError("; ".join(problems))
    return net


def save(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(net))


def load(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())
