"""Soft exponential activation kernels.

The soft exponential function ``f(alpha, x)`` is logarithmic for
``alpha = -1``, the identity for ``alpha = 0`` and exponential for
``alpha = 1``::

    f(alpha, x) = -log(1 - alpha * (x + alpha)) / alpha    alpha < 0
                = x                                        alpha = 0
                = (exp(alpha * x) - 1) / alpha + alpha     alpha > 0

Two families of functions live here:

* scalar functions (:func:`softexp`, :func:`dsoftexp_dx`, ...) working on
  Python floats, used directly and by the CLI;
* array kernels (:func:`activate`, :func:`activate_with_grads`) working on
  broadcast complex numpy arrays, used by the network engine.

Both use ``expm1``/``log1p`` style evaluation so that small ``|alpha|`` does
not suffer from cancellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from softexp.errors import DomainError, NonFiniteInputError, RangeError

__all__ = [
    "Alpha",
    "EvalMode",
    "activate",
    "activate_with_grads",
    "addmul",
    "dsoftexp_dalpha",
    "dsoftexp_dx",
    "g_linexp",
    "g_loglin",
    "real_domain_lower_bound",
    "softexp",
    "softexp_complex",
]

Number = Union[int, float, complex]

# Below these magnitudes the derivative helpers switch to their power series.
_PHI_SERIES_RADIUS = 0.1
_CHI_SERIES_RADIUS = 0.01
_SERIES_TERMS = 11
# Below this magnitude of alpha*(x+alpha) the log branch uses log1p.
_LOG1P_RADIUS = 0.5
# Below this |alpha| the value is x + alpha*(1 + x**2/2) to double precision;
# it also avoids alpha*x underflowing for subnormal alpha.
_TINY_ALPHA = 1e-100
_EXP_FORM_BELOW = -1.0


class EvalMode(enum.Enum):
    """How the logarithmic branch treats non-positive arguments.

    ``REAL_STRICT`` raises :class:`DomainError`; ``COMPLEX_PRINCIPAL``
    continues through the principal complex logarithm.  An argument of
    exactly zero is an error in both modes.
    """

    REAL_STRICT = "real"
    COMPLEX_PRINCIPAL = "complex"


@dataclass(frozen=True)
class Alpha:
    """Complex activation parameter ``re + i*im`` of a single unit."""

    re: float = 0.0
    im: float = 0.0

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise NonFiniteInputError(f"alpha must be finite, got ({re}, {im})")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def of(cls, value: "Alpha | Number") -> "Alpha":
        if isinstance(value, Alpha):
            return value
        c = complex(value)
        return cls(c.real, c.imag)

    def is_real(self) -> bool:
        return self.im == 0.0

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def _finite(x, name="x"):
    c = complex(x)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise NonFiniteInputError(f"{name} must be finite, got {x!r}")
    return x


def _real_alpha(alpha) -> float:
    a = Alpha.of(alpha)
    if not a.is_real():
        raise ValueError(
            f"alpha must be real here (got im={a.im}); use softexp_complex"
        )
    return a.re


def _real_x(x) -> float:
    if isinstance(x, complex):
        if x.imag != 0.0:
            raise ValueError("x must be real here; use softexp_complex")
        x = x.real
    x = float(x)
    _finite(x)
    return x


# --------------------------------------------------------------------------
# scalar kernels


def real_domain_lower_bound(alpha: float) -> float:
    """Return the bound ``1/alpha - alpha`` above which ``f(alpha, .)`` is real.

    Only meaningful for ``alpha < 0``; the log branch is defined in real
    arithmetic exactly for ``x > real_domain_lower_bound(alpha)``.
    """
    alpha = float(alpha)
    if not alpha < 0.0:
        raise ValueError(f"alpha must be negative, got {alpha}")
    return 1.0 / alpha - alpha


def _log_argument(a: float, x: float) -> tuple[float, float]:
    """Return ``(u, 1 - u)`` with ``u = a*(x + a)``."""
    u = a * (x + a)
    # (1 - a*a) - a*x keeps x exact when a == -1
    return u, (1.0 - a * a) - a * x


def _check_real_domain(a: float, x: float) -> float:
    u, arg = _log_argument(a, x)
    if not arg > 0.0:
        raise DomainError(
            f"log branch argument 1 - alpha*(x + alpha) = {arg!r} <= 0 "
            f"for alpha={a!r}, x={x!r} (need x > {real_domain_lower_bound(a)!r})"
        )
    return arg


def softexp(alpha, x, mode: EvalMode = EvalMode.REAL_STRICT):
    """Evaluate the soft exponential function for a real ``alpha``.

    Returns a float, or a complex number when ``mode`` is
    ``COMPLEX_PRINCIPAL`` and the log argument is negative.

    >>> softexp(0.0, 5.0)
    5.0
    >>> round(softexp(-1.0, math.e), 15)
    1.0
    """
    a = _real_alpha(alpha)
    x = _real_x(x)
    if a == 0.0:
        return x
    if abs(a) < _TINY_ALPHA:
        if a < 0.0:
            _check_real_domain(a, x)
        return x + a * (1.0 + 0.5 * x * x)
    if a > 0.0:
        try:
            w = a * x
            if w < _EXP_FORM_BELOW:
                # expm1 form cancels here; a - 1/a is exact at a = 1
                return math.exp(w) / a + (a - 1.0 / a)
            return math.expm1(w) / a + a
        except OverflowError:
            raise RangeError(f"exp(alpha*x) overflows for alpha={a!r}, x={x!r}") from None
    u, arg = _log_argument(a, x)
    if arg > 0.0:
        log = math.log1p(-u) if abs(u) < _LOG1P_RADIUS else math.log(arg)
        return -log / a
    if arg == 0.0 or mode is EvalMode.REAL_STRICT:
        _check_real_domain(a, x)
    return -complex(math.log(-arg), math.pi) / a


def g_linexp(alpha: float, x: float) -> float:
    """``(exp(alpha*x) - 1)/alpha + alpha``, the linear-to-exponential family."""
    alpha = float(alpha)
    x = _real_x(x)
    _finite(alpha, "alpha")
    if alpha == 0.0:
        return x
    if abs(alpha) < _TINY_ALPHA:
        return x + alpha * (1.0 + 0.5 * x * x)
    try:
        return math.expm1(alpha * x) / alpha + alpha
    except OverflowError:
        raise RangeError(f"exp(alpha*x) overflows for alpha={alpha!r}, x={x!r}") from None


def g_loglin(alpha: float, x: float) -> float:
    """``log(1 + alpha*(x - alpha))/alpha``, the inverse of :func:`g_linexp` in x."""
    alpha = float(alpha)
    x = _real_x(x)
    _finite(alpha, "alpha")
    if alpha == 0.0:
        return x
    v = alpha * (x - alpha)
    arg = (1.0 - alpha * alpha) + alpha * x
    if not arg > 0.0:
        raise DomainError(
            f"log argument 1 + alpha*(x - alpha) = {arg!r} <= 0 "
            f"for alpha={alpha!r}, x={x!r}"
        )
    if abs(alpha) < _TINY_ALPHA:
        return x - alpha * (1.0 + 0.5 * x * x)
    return (math.log1p(v) if abs(v) < _LOG1P_RADIUS else math.log(arg)) / alpha


def dsoftexp_dx(alpha, x) -> float:
    """Partial derivative of :func:`softexp` with respect to ``x``."""
    a = _real_alpha(alpha)
    x = _real_x(x)
    if a < 0.0:
        return 1.0 / _check_real_domain(a, x)
    try:
        return math.exp(a * x)
    except OverflowError:
        raise RangeError(f"exp(alpha*x) overflows for alpha={a!r}, x={x!r}") from None


def dsoftexp_dalpha(alpha, x) -> float:
    """Partial derivative of :func:`softexp` with respect to ``alpha``.

    Equal to ``1 + x**2/2`` at ``alpha = 0``.  The closed forms are rewritten
    as ``1 + x**2 * phi(alpha*x)`` (exponential side) and
    ``1/(1-u) + (x+alpha)**2 * chi(u)`` with ``u = alpha*(x+alpha)``
    (logarithmic side), whose helpers switch to power series near zero.
    """
    a = _real_alpha(alpha)
    x = _real_x(x)
    if a == 0.0:
        return 1.0 + 0.5 * x * x
    if a > 0.0:
        t = a * x
        if t > 709.0:
            raise RangeError(f"exp(alpha*x) overflows for alpha={a!r}, x={x!r}")
        return 1.0 + x * x * float(_phi(np.float64(t)))
    arg = _check_real_domain(a, x)
    u = a * (x + a)
    return 1.0 / arg + (x + a) ** 2 * float(_chi(np.float64(u)))


def addmul(beta, p, q, mode: EvalMode = EvalMode.REAL_STRICT):
    """Blend between ``p + q`` (``beta = 0``) and ``p * q`` (``beta = 1``).

    Computes ``f(beta, f(-beta, p) + f(-beta, q))``.
    """
    beta = _real_alpha(beta)
    s = softexp(-beta, p, mode) + softexp(-beta, q, mode)
    if isinstance(s, complex):
        return softexp_complex(beta, s, mode)
    return softexp(beta, s, mode)


def softexp_complex(alpha, x, mode: EvalMode = EvalMode.COMPLEX_PRINCIPAL) -> complex:
    """Soft exponential continued to complex ``alpha`` and ``x``.

    A negative real ``alpha`` uses the logarithmic branch; every other
    ``alpha`` uses ``(exp(alpha*x) - 1)/alpha + alpha`` in complex
    arithmetic.  With ``alpha = i*w`` and real ``x`` this gives
    ``sin(w*x)/w + i*(w + (1 - cos(w*x))/w)``.
    """
    a = complex(Alpha.of(alpha))
    x = complex(_finite(x))
    return complex(activate(np.complex128(a), np.complex128(x), mode)[()])


# --------------------------------------------------------------------------
# array kernels


def _series(coeffs: np.ndarray, t):
    out = np.zeros_like(t) + coeffs[-1]
    for c in coeffs[-2::-1]:
        out = out * t + c
    return out


# phi(t) = sum_{m>=2} (m-1)/m! t^(m-2)
_PHI_COEFFS = np.array(
    [(m - 1) / math.factorial(m) for m in range(2, 2 + _SERIES_TERMS)]
)
# chi(u) = sum_{k>=2} (k-1)/k u^(k-2)
_CHI_COEFFS = np.array([(k - 1) / k for k in range(2, 2 + _SERIES_TERMS)])


def _phi(t):
    """``((t - 1)*expm1(t) + t) / t**2``, i.e. ``(t e^t - e^t + 1)/t^2``."""
    t = np.asarray(t)
    small = np.abs(t) < _PHI_SERIES_RADIUS
    out = _series(_PHI_COEFFS, np.where(small, t, 0)) if np.any(small) else np.zeros_like(t)
    big = ~small
    if np.any(big):
        tb = t[big]
        e = _cexpm1(tb) if np.iscomplexobj(tb) else np.expm1(tb)
        out = np.asarray(out, dtype=np.result_type(out, tb))
        out[big] = ((tb - 1) * e + tb) / (tb * tb)
    return out


def _chi(u):
    """``(log1p(-u) + u/(1 - u)) / u**2``."""
    u = np.asarray(u)
    small = np.abs(u) < _CHI_SERIES_RADIUS
    out = _series(_CHI_COEFFS, np.where(small, u, 0)) if np.any(small) else np.zeros_like(u)
    big = ~small
    if np.any(big):
        ub = u[big]
        log = _clog1p(-ub) if np.iscomplexobj(ub) else np.log1p(-ub)
        out = np.asarray(out, dtype=np.result_type(out, ub))
        out[big] = (log + ub / (1 - ub)) / (ub * ub)
    return out


def _complex(re, im):
    out = np.empty(np.shape(re), dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def _cexpm1(w):
    wr, wi = w.real, w.imag
    s = np.sin(0.5 * wi)
    return _complex(np.expm1(wr) * np.cos(wi) - 2.0 * s * s, np.exp(wr) * np.sin(wi))


def _clog1p(w):
    wr, wi = w.real, w.imag
    return _complex(0.5 * np.log1p(wr * (2.0 + wr) + wi * wi), np.arctan2(wi, 1.0 + wr))


def _clog(arg):
    # +0.0 folds a negative zero imaginary part so negative reals map to +i*pi
    return _complex(np.log(np.abs(arg)), np.arctan2(arg.imag + 0.0, arg.real))


def _branches(a, z):
    ident = a == 0
    tiny = ~ident & (np.abs(a) < _TINY_ALPHA)
    log = (a.imag == 0) & (a.real < 0) & ~tiny
    exp = ~(ident | tiny | log)
    return ident, tiny, log, exp


def _tiny_parts(a, z, mode):
    # the log branch still has a domain: 1 - alpha*(z + alpha) ~ 1 - alpha*z
    on_log = (a.imag == 0) & (a.real < 0)
    if np.any(on_log):
        _log_parts(a[on_log], z[on_log], mode)
    return z + a * (1.0 + 0.5 * z * z), 1.0 + a * z, 1.0 + 0.5 * z * z


def _log_parts(a, z, mode):
    u = a * (z + a)
    arg = (1 - a * a) - a * z
    on_axis = arg.imag == 0
    zero = on_axis & (arg.real == 0)
    negative = on_axis & (arg.real < 0)
    bad = zero | negative if mode is EvalMode.REAL_STRICT else zero
    if np.any(bad):
        i = np.flatnonzero(bad)[0]
        raise DomainError(
            f"log branch argument 1 - alpha*(x + alpha) = {complex(arg.flat[i])} "
            f"for alpha={float(a.flat[i].real)!r}, x={complex(z.flat[i])} "
            f"({mode.value} mode)"
        )
    small = np.abs(u) < _LOG1P_RADIUS
    log = np.empty_like(arg)
    log[small] = _clog1p(-u[small])
    log[~small] = _clog(arg[~small])
    return u, arg, log


def _exp_parts(a, w):
    with np.errstate(over="ignore", invalid="ignore"):
        e = _cexpm1(w)
    if not np.all(np.isfinite(e)):
        i = np.flatnonzero(~np.isfinite(e))[0]
        raise RangeError(f"exp(alpha*x) overflows for alpha*x={complex(w.flat[i])}")
    return e


def _exp_value(a, w, e):
    out = e / a + a
    far = w.real < _EXP_FORM_BELOW
    if np.any(far):
        af = a[far]
        # for strongly negative alpha*x, e + 1 is tiny and the expm1 form
        # loses it to cancellation
        out[far] = np.exp(w[far]) / af + (af - 1.0 / af)
    return out


def _prepare(alpha, z):
    a, z = np.broadcast_arrays(
        np.asarray(alpha, dtype=np.complex128), np.asarray(z, dtype=np.complex128)
    )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(z))):
        raise NonFiniteInputError("alpha and x must be finite")
    return a, z


def activate(alpha, z, mode: EvalMode = EvalMode.REAL_STRICT) -> np.ndarray:
    """Elementwise soft exponential of complex arrays ``alpha`` and ``z``."""
    a, z = _prepare(alpha, z)
    out = np.empty(a.shape, dtype=np.complex128)
    ident, tiny, log, exp = _branches(a, z)
    out[ident] = z[ident]
    if np.any(tiny):
        out[tiny] = _tiny_parts(a[tiny], z[tiny], mode)[0]
    if np.any(log):
        al = a[log]
        _, _, lg = _log_parts(al, z[log], mode)
        out[log] = -lg / al
    if np.any(exp):
        ae = a[exp]
        w = ae * z[exp]
        out[exp] = _exp_value(ae, w, _exp_parts(ae, w))
    return out


def activate_with_grads(alpha, z, mode: EvalMode = EvalMode.REAL_STRICT):
    """Return ``(f, df/dz, df/dalpha)`` as complex arrays.

    The derivatives are complex (holomorphic) derivatives of the branch in
    use at each element.
    """
    a, z = _prepare(alpha, z)
    f = np.empty(a.shape, dtype=np.complex128)
    dz = np.empty_like(f)
    da = np.empty_like(f)
    ident, tiny, log, exp = _branches(a, z)

    zi = z[ident]
    f[ident] = zi
    dz[ident] = 1.0
    da[ident] = 1.0 + 0.5 * zi * zi

    if np.any(tiny):
        f[tiny], dz[tiny], da[tiny] = _tiny_parts(a[tiny], z[tiny], mode)

    if np.any(log):
        al, zl = a[log], z[log]
        u, arg, lg = _log_parts(al, zl, mode)
        f[log] = -lg / al
        dz[log] = 1.0 / arg
        da[log] = 1.0 / arg + (zl + al) ** 2 * _chi(u)

    if np.any(exp):
        ae, ze = a[exp], z[exp]
        w = ae * ze
        e = _exp_parts(ae, w)
        f[exp] = _exp_value(ae, w, e)
        dz[exp] = np.exp(w)
        da[exp] = 1.0 + ze * ze * _phi(w)
    return f, dz, da

