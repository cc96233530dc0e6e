"""Command line interface: ``softexp <command> [flags]``.

Exit codes: 0 success, 1 usage error, 2 domain or numeric error,
3 I/O or parse error.  Tables go to stdout as CSV; diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys

import numpy as np

from softexp.activation import (
    EvalMode,
    addmul,
    dsoftexp_dalpha,
    dsoftexp_dx,
    real_domain_lower_bound,
    softexp,
    softexp_complex,
)
from softexp.builders import BuilderSpec, RBF_SOURCES, build
from softexp.errors import (
    DatasetFormatError,
    DivergenceError,
    DomainError,
    NetworkFormatError,
    NonFiniteInputError,
    RangeError,
    ShapeError,
)
from softexp.network import forward, load, save, serialize
from softexp.trainer import TrainConfig, fit, grad_check, init_network, load_dataset

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3

KINDS = ("inner-product", "sq-distance", "euclidean", "polynomial", "rbf", "fourier")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v: float) -> str:
    # + 0.0 prints negative zero as 0
    return format(float(v) + 0.0, ".17g")


def fmt_label(v: float) -> str:
    """Shortest round-trip form for grid coordinates (0.1 rather than 0.10000000000000001)."""
    text = repr(float(v) + 0.0)
    return text[:-2] if text.endswith(".0") else text


def fmt_complex(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return fmt(c.real)
    return f"{fmt(c.real)}{'+' if c.imag >= 0 else '-'}{fmt(abs(c.imag))}j"


def _floats(text: str, name: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"--{name}: values must be finite")
    return values


def _grid(lo: float, hi: float, step: float, name: str) -> np.ndarray:
    if not step > 0 or hi < lo:
        raise UsageError(f"{name}: need min <= max and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    raw = lo + step * np.arange(count)
    # snap accumulated representation noise (0.30000000000000004 -> 0.3)
    snapped = np.round(raw, 12)
    noise = np.abs(snapped - raw) <= 8 * np.spacing(np.maximum(np.abs(raw), 1.0))
    return np.where(noise, snapped, raw) + 0.0


def _mode(text: str) -> EvalMode:
    return EvalMode(text)


def _emit(rows, header):
    out = sys.stdout
    out.write(header + "\n")
    for row in rows:
        out.write(",".join(row) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_eval(args):
    alpha = _floats(args.alpha, "alpha")
    if len(alpha) not in (1, 2):
        raise UsageError("--alpha takes <re> or <re>,<im>")
    mode = _mode(args.mode)
    if len(alpha) == 2 and alpha[1] != 0.0:
        value = softexp_complex(complex(alpha[0], alpha[1]), args.x, mode)
    else:
        value = softexp(alpha[0], args.x, mode)
    print(fmt_complex(value))


def cmd_grad(args):
    _emit([[fmt(dsoftexp_dx(args.alpha, args.x)), fmt(dsoftexp_dalpha(args.alpha, args.x))]],
          "df_dx,df_dalpha")


def cmd_plot_activation(args):
    alphas = _grid(args.alpha_min, args.alpha_max, args.alpha_step, "alpha grid")
    xs = _grid(args.x_min, args.x_max, args.x_step, "x grid")
    rows = []
    for a in alphas:
        lower = real_domain_lower_bound(a) if a < 0 else -math.inf
        for x in xs:
            if x > lower:
                rows.append([fmt_label(a), fmt_label(x), fmt(softexp(a, x))])
    _emit(rows, "alpha,x,f")


def cmd_plot_addmul(args):
    betas = _grid(args.beta_min, args.beta_max, args.beta_step, "beta grid")
    _emit(([fmt_label(b), fmt_complex(addmul(b, args.p, args.q))] for b in betas), "beta,h")


def cmd_plot_fourier(args):
    freqs = _floats(args.alpha_i_list, "alpha-i-list")
    if not freqs:
        raise UsageError("--alpha-i-list is empty")
    if any(w == 0.0 for w in freqs):
        raise DomainError("alpha_i = 0 has no frequency; use nonzero values")
    x_range = _floats(args.x_range, "x-range")
    if len(x_range) not in (2, 3):
        raise UsageError("--x-range takes <min>,<max>[,<step>]")
    step = x_range[2] if len(x_range) == 3 else args.x_step
    xs = _grid(x_range[0], x_range[1], step, "x grid")
    rows = []
    for w in freqs:
        for x in xs:
            v = softexp_complex(complex(0.0, w), x)
            rows.append([fmt_label(w), fmt_label(x), fmt(v.real), fmt(v.imag)])
    _emit(rows, "alpha_i,x,re,im")


def cmd_build(args):
    spec = BuilderSpec(
        kind=args.kind,
        n=args.n,
        coeffs=_floats(args.coeffs, "coeffs") if args.coeffs else [],
        r=args.r,
        source=args.source,
        freqs=_floats(args.freqs, "freqs") if args.freqs else [],
        sin_coeffs=_floats(args.sin, "sin") if args.sin else [],
        cos_coeffs=_floats(args.cos, "cos") if args.cos else [],
        offset=args.offset,
    )
    if spec.kind == "fourier":
        m = len(spec.freqs)
        if not spec.sin_coeffs:
            spec.sin_coeffs = [0.0] * m
        if not spec.cos_coeffs:
            spec.cos_coeffs = [0.0] * m
    try:
        net = build(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out in (None, "-"):
        sys.stdout.write(serialize(net))
    else:
        save(net, args.out)


def _input_rows(text: str, width: int) -> np.ndarray:
    if os.path.isfile(text):
        rows = []
        with open(text, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append([float(t) for t in line.split(",")])
                except ValueError:
                    if rows:
                        raise DatasetFormatError(f"{text}: bad row {line!r}") from None
                    # first non-numeric line is a header
        arr = np.array(rows, dtype=float)
    else:
        arr = np.array([_floats(text, "input")])
    if arr.ndim != 2 or arr.shape[1] != width:
        raise UsageError(f"input rows must have {width} values")
    return arr


def cmd_run(args):
    net = load(args.net)
    rows = _input_rows(args.input, net.input_dim)
    out = forward(net, rows, _mode(args.mode))
    for row in np.atleast_2d(out):
        print(",".join(fmt_complex(v) for v in row))


def cmd_train(args):
    data = load_dataset(args.data)
    widths = [int(w) for w in _floats(args.widths, "widths")]
    if widths[0] != data.inputs.shape[1] or widths[-1] != data.targets.shape[1]:
        raise UsageError(
            f"--widths {widths} does not match the dataset "
            f"({data.inputs.shape[1]} inputs, {data.targets.shape[1]} targets)"
        )
    try:
        config = TrainConfig(
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            l1_weights=args.l1w,
            l1_alpha=args.l1a,
            seed=args.seed,
            mode=_mode(args.mode),
        )
        net = init_network(widths, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = fit(net, data, config)
    if args.out:
        save(net, args.out)
    sys.stdout.write(report.to_csv())


def cmd_gradcheck(args):
    net = load(args.net)
    x = _input_rows(args.input, net.input_dim)
    target = (
        np.array([_floats(args.target, "target")])
        if args.target
        else np.zeros((x.shape[0], net.output_dim))
    )
    if target.shape[1] != net.output_dim:
        raise UsageError(f"--target needs {net.output_dim} values")
    err = grad_check(net, x, np.broadcast_to(target, (x.shape[0], net.output_dim)),
                     args.step, _mode(args.mode))
    print(fmt(err))
    if not err <= args.tolerance:
        print(f"gradient check failed: {err:.3g} > {args.tolerance:.3g}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="softexp", description="Soft exponential activation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    modes = [m.value for m in EvalMode]

    s = sub.add_parser("eval", help="evaluate f(alpha, x)")
    s.add_argument("--alpha", required=True, help="<re> or <re>,<im>")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--mode", choices=modes, default="real")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("grad", help="partial derivatives of f for real alpha")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--x", type=float, required=True)
    s.set_defaults(func=cmd_grad)

    s = sub.add_parser("plot-activation", help="CSV grid of f(alpha, x)")
    s.add_argument("--alpha-min", type=float, default=-1.0)
    s.add_argument("--alpha-max", type=float, default=1.0)
    s.add_argument("--alpha-step", type=float, default=0.1)
    s.add_argument("--x-min", type=float, default=-5.0)
    s.add_argument("--x-max", type=float, default=5.0)
    s.add_argument("--x-step", type=float, default=0.1)
    s.set_defaults(func=cmd_plot_activation)

    s = sub.add_parser("plot-addmul", help="CSV of the add/multiply blend over beta")
    s.add_argument("--p", type=float, default=3.0)
    s.add_argument("--q", type=float, default=7.0)
    s.add_argument("--beta-min", type=float, default=0.0)
    s.add_argument("--beta-max", type=float, default=1.0)
    s.add_argument("--beta-step", type=float, default=0.01)
    s.set_defaults(func=cmd_plot_addmul)

    s = sub.add_parser("plot-fourier", help="CSV of f(i*alpha_i, x) components")
    s.add_argument("--alpha-i-list", default="0.5,1,1.5,2")
    s.add_argument("--x-range", default="-5,5", help="<min>,<max>[,<step>]")
    s.add_argument("--x-step", type=float, default=0.1)
    s.set_defaults(func=cmd_plot_fourier)

    s = sub.add_parser("build", help="write an exactly constructed network")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--n", type=int, default=1, help="vector dimension")
    s.add_argument("--coeffs", help="polynomial coefficients c0,c1,...")
    s.add_argument("--r", type=float, default=1.0, help="RBF radius weight")
    s.add_argument("--source", choices=RBF_SOURCES, default="sq-distance")
    s.add_argument("--freqs", help="Fourier frequencies")
    s.add_argument("--sin", help="sine coefficients")
    s.add_argument("--cos", help="cosine coefficients")
    s.add_argument("--offset", type=float, default=0.0)
    s.add_argument("--out", help="output path (default stdout)")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("run", help="evaluate a saved network")
    s.add_argument("--net", required=True)
    s.add_argument("--input", required=True, help="comma-separated row or CSV file")
    s.add_argument("--mode", choices=modes, default="real")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("train", help="train a fresh network on a CSV dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--widths", required=True, help="input,hidden...,output")
    s.add_argument("--lr", type=float, default=0.01)
    s.add_argument("--epochs", type=int, default=1000)
    s.add_argument("--batch-size", type=int, default=16)
    s.add_argument("--l1w", type=float, default=0.0)
    s.add_argument("--l1a", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=modes, default="real")
    s.add_argument("--out", help="where to save the trained network")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("gradcheck", help="compare backprop with finite differences")
    s.add_argument("--net", required=True)
    s.add_argument("--input", required=True, help="comma-separated row or CSV file")
    s.add_argument("--target", help="target row (default zeros)")
    s.add_argument("--step", type=float, default=1e-6)
    s.add_argument("--tolerance", type=float, default=1e-4)
    s.add_argument("--mode", choices=modes, default="real")
    s.set_defaults(func=cmd_gradcheck)
    return p


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse mistakes values such as "-1e-3" or "-1,0" for flags
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok.startswith("--")
            and "=" not in tok
            and i + 1 < len(argv)
            and _NEGATIVE_VALUE.match(argv[i + 1])
        ):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(argv))
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"softexp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, RangeError, NonFiniteInputError, DivergenceError) as exc:
        print(f"softexp {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, NetworkFormatError, DatasetFormatError, ShapeError) as exc:
        print(f"softexp {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"softexp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.flush()
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
