"""Initialization and L1-regularized gradient descent for soft exponential nets.

Networks start with every ``alpha = 0 + 0i`` (so they are linear maps) and
spectrally normalized Gaussian weights.  Training steps weights, biases and
alphas along the negative MSE gradient, then soft-thresholds weights and
alphas to promote exact zeros.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from softexp.activation import EvalMode
from softexp.errors import DatasetFormatError, DivergenceError, DomainError, ShapeError
from softexp.network import (
    Layer,
    Network,
    Projection,
    backward,
    forward,
    forward_traced,
)

log = logging.getLogger(__name__)

POWER_ITERATIONS = 200
POWER_RTOL = 1e-8
IMAG_TOLERANCE = 1e-6


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 1000
    batch_size: int = 16
    l1_weights: float = 0.0
    l1_alpha: float = 0.0
    seed: int = 0
    mode: EvalMode = EvalMode.REAL_STRICT

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if self.l1_weights < 0 or self.l1_alpha < 0:
            raise ValueError("L1 strengths must be nonnegative")
        self.mode = EvalMode(self.mode)


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ShapeError("inputs and targets have different row counts")
        if self.inputs.shape[0] < 1:
            raise ShapeError("dataset is empty")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.targets))):
            raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return self.inputs.shape[0]


@dataclass
class TrainReport:
    losses: list[float] = field(default_factory=list)
    zero_weights: list[int] = field(default_factory=list)
    zero_alphas: list[int] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.losses[-1]

    @property
    def final_zero_weights(self) -> int:
        return self.zero_weights[-1]

    @property
    def final_zero_alphas(self) -> int:
        return self.zero_alphas[-1]

    def to_csv(self) -> str:
        rows = ["epoch,loss,zero_weights,zero_alphas"]
        for i, (loss, zw, za) in enumerate(
            zip(self.losses, self.zero_weights, self.zero_alphas), start=1
        ):
            rows.append(f"{i},{loss:.17g},{zw},{za}")
        return "\n".join(rows) + "\n"


# --------------------------------------------------------------------------
# initialization


def largest_singular_value(W, iterations=POWER_ITERATIONS, rtol=POWER_RTOL) -> float:
    """Power iteration on ``W^H W``; returns ``sigma_max`` and never overestimates."""
    W = np.asarray(W)
    if not np.any(W):
        raise ValueError("zero matrix has no spectral normalization")
    gram = W.conj().T @ W
    # start from the column of largest norm, which cannot be orthogonal to
    # the top eigenvector of the Gram matrix
    v = gram[:, np.argmax(np.linalg.norm(gram, axis=0))]
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        w = gram @ v
        new = float(np.real(np.vdot(v, w)))
        v = w / np.linalg.norm(w)
        if abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return float(np.sqrt(lam))


def spectral_normalize(W) -> np.ndarray:
    """Return ``W / sigma_max(W)``.

    ``sigma_max`` comes from power iteration; when the iteration has not
    converged (nearly repeated top singular values) the estimate is
    replaced by an SVD.
    """
    W = np.asarray(W)
    sigma = largest_singular_value(W)
    exact = np.linalg.norm(W, 2)
    if abs(sigma - exact) > 1e-9 * exact:
        log.debug("power iteration stalled (%r vs %r); using SVD", sigma, exact)
        sigma = exact
    return W / sigma


def init_network(widths, seed: int) -> Network:
    """Network with ``alpha = 0`` everywhere and normalized Gaussian weights.

    ``widths`` lists the input dimension followed by each layer's width.
    The output layer keeps only real pre-activations.
    """
    widths = [int(w) for w in widths]
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ValueError(f"need at least two positive widths, got {widths}")
    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out in zip(widths[:-1], widths[1:]):
        W = spectral_normalize(rng.standard_normal((n_out, n_in)))
        layers.append(Layer(W))
    layers[-1].projection = Projection.REAL_PART
    return Network(widths[0], layers)


# --------------------------------------------------------------------------
# loss and gradient


def mse_loss(output, target, check_imag: bool = True) -> float:
    """Mean squared difference between the real part of ``output`` and ``target``.

    With ``check_imag`` an imaginary part above ``1e-6`` raises ``ValueError``.
    """
    output = np.asarray(output, dtype=np.complex128)
    target = np.asarray(target, dtype=float)
    if output.shape != target.shape:
        raise ShapeError(f"output shape {output.shape} != target shape {target.shape}")
    if check_imag and np.any(np.abs(output.imag) > IMAG_TOLERANCE):
        raise ValueError("network output has a non-negligible imaginary part")
    return float(np.mean((output.real - target) ** 2))


def loss_and_gradient(net: Network, inputs, targets, mode=EvalMode.REAL_STRICT, check_imag=True):
    """MSE over a batch and its :class:`GradientSet`."""
    out, trace = forward_traced(net, inputs, mode)
    targets = np.asarray(targets, dtype=float).reshape(np.shape(out))
    loss = mse_loss(out, targets, check_imag)
    grad_out = 2.0 * (out.real - targets) / targets.size
    return loss, backward(net, trace, grad_out)


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _soft_threshold_complex(z: np.ndarray, t: float) -> np.ndarray:
    out = np.empty_like(z)
    out.real = soft_threshold(z.real, t)
    out.imag = soft_threshold(z.imag, t)
    return out


def _count_zeros(net: Network) -> tuple[int, int]:
    zw = sum(int(np.count_nonzero(layer.weights == 0)) for layer in net.layers)
    za = sum(
        int(np.count_nonzero(layer.alphas.real == 0) + np.count_nonzero(layer.alphas.imag == 0))
        for layer in net.layers
    )
    return zw, za


def _step(net: Network, grads, config: TrainConfig, lr: float):
    last = len(net.layers) - 1
    for k, (layer, g) in enumerate(zip(net.layers, grads.layers)):
        d_alpha = g.d_alpha
        if k == last:
            # output alphas are held real so the network maps reals to reals
            d_alpha = d_alpha.real.astype(np.complex128)
        layer.weights = layer.weights - lr * g.d_weights
        layer.bias = layer.bias - lr * g.d_bias
        layer.alphas = layer.alphas - lr * d_alpha
        if config.l1_weights > 0:
            layer.weights = _soft_threshold_complex(layer.weights, lr * config.l1_weights)
        if config.l1_alpha > 0:
            layer.alphas = _soft_threshold_complex(layer.alphas, lr * config.l1_alpha)


def dataset_loss(net: Network, data: Dataset, mode=EvalMode.REAL_STRICT) -> float:
    return mse_loss(forward(net, data.inputs, mode), data.targets)


def fit(net: Network, data: Dataset, config: TrainConfig) -> TrainReport:
    """Train ``net`` in place with shuffled mini-batch gradient descent.

    After each step weights and alphas are soft-thresholded by
    ``learning_rate * l1_weights`` and ``learning_rate * l1_alpha``.
    The reported loss of an epoch is the full-dataset MSE after it.
    """
    if data.inputs.shape[1] != net.input_dim or data.targets.shape[1] != net.output_dim:
        raise ShapeError(
            f"dataset is {data.inputs.shape[1]} -> {data.targets.shape[1]}, "
            f"network is {net.input_dim} -> {net.output_dim}"
        )
    rng = np.random.default_rng(config.seed)
    report = TrainReport()
    n = len(data)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            try:
                _, grads = loss_and_gradient(
                    net, data.inputs[idx], data.targets[idx], config.mode
                )
            except DomainError as exc:
                raise DomainError(
                    f"epoch {epoch}, batch {b} (rows {sorted(idx.tolist())}): {exc}"
                ) from None
            _step(net, grads, config, config.learning_rate)
        loss = dataset_loss(net, data, config.mode)
        if not np.isfinite(loss):
            raise DivergenceError(f"loss became non-finite at epoch {epoch}")
        zw, za = _count_zeros(net)
        report.losses.append(loss)
        report.zero_weights.append(zw)
        report.zero_alphas.append(za)
    return report


# --------------------------------------------------------------------------
# gradient check


def _on_log_seam(net: Network, k: int, name: str, idx, part: str) -> bool:
    # the imaginary coordinate of a negative real alpha crosses from the log
    # branch to the exp branch, so no two-sided derivative exists there
    if name != "alphas" or part != "imag":
        return False
    a = net.layers[k].alphas[idx]
    return a.imag == 0 and a.real < 0


def _straddles_seam(net: Network, k: int, name: str, idx, part: str) -> bool:
    # moving the real part of alpha = 0 crosses from the log branch to the
    # exp branch; the second derivative jumps there
    if name != "alphas" or part != "real":
        return False
    return net.layers[k].alphas[idx] == 0


def grad_check(net: Network, inputs, targets, step: float = 1e-6, mode=EvalMode.REAL_STRICT) -> float:
    """Largest relative gap between backprop and central differences.

    Every real coordinate of every parameter is perturbed by ``+-step``.
    The relative error of a coordinate is ``|a - n| / max(|a|, |n|, 1e-4)``.
    Coordinates without a two-sided derivative (the imaginary part of a
    negative real alpha) are skipped.  At ``alpha = 0`` the plain central
    difference has an O(step) bias, so it is extrapolated from ``step`` and
    ``2 * step``.
    """
    _, grads = loss_and_gradient(net, inputs, targets, mode, check_imag=False)
    probe = net.copy()

    def central(arr, idx, unit, h):
        original = arr[idx]
        arr[idx] = original + unit * h
        plus, _ = loss_and_gradient(probe, inputs, targets, mode, check_imag=False)
        arr[idx] = original - unit * h
        minus, _ = loss_and_gradient(probe, inputs, targets, mode, check_imag=False)
        arr[idx] = original
        return (plus - minus) / (2 * h)

    worst = 0.0
    for (k, name, arr), (_, _, garr) in zip(probe.parameters(), grads.arrays()):
        for idx in np.ndindex(arr.shape):
            for part, unit in (("real", 1.0), ("imag", 1j)):
                if _on_log_seam(net, k, name, idx, part):
                    continue
                numeric = central(arr, idx, unit, step)
                if _straddles_seam(net, k, name, idx, part):
                    numeric = 2 * numeric - central(arr, idx, unit, 2 * step)
                analytic = getattr(garr[idx], part)
                scale = max(abs(analytic), abs(numeric), 1e-4)
                worst = max(worst, abs(analytic - numeric) / scale)
    return worst


# --------------------------------------------------------------------------
# dataset files


def load_dataset(path) -> Dataset:
    """Read a CSV with header ``x0..x{n-1},y0..y{m-1}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file") from None
        xs = [h for h in header if h.startswith("x")]
        ys = [h for h in header if h.startswith("y")]
        if (
            header != xs + ys
            or xs != [f"x{i}" for i in range(len(xs))]
            or ys != [f"y{i}" for i in range(len(ys))]
            or not xs
            or not ys
        ):
            raise DatasetFormatError(
                f"{path}: header must be x0..x{{n-1}},y0..y{{m-1}}, got {header}"
            )
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetFormatError(
                    f"{path}:{line}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{line}: {exc}") from None
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    arr = np.array(rows)
    return Dataset(arr[:, : len(xs)], arr[:, len(xs) :])


def save_dataset(data: Dataset, path) -> None:
    n, m = data.inputs.shape[1], data.targets.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(n)] + [f"y{j}" for j in range(m)])
        for x, y in zip(data.inputs, data.targets):
            writer.writerow([format(v, ".17g") for v in np.concatenate([x, y])])
