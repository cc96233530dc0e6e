import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softexp.activation import (
    Alpha,
    EvalMode,
    activate,
    activate_with_grads,
    addmul,
    dsoftexp_dalpha,
    dsoftexp_dx,
    g_linexp,
    g_loglin,
    real_domain_lower_bound,
    softexp,
    softexp_complex,
)
from softexp.errors import DomainError, NonFiniteInputError, RangeError

from conftest import central_difference, mp_softexp, mp_softexp_complex

REAL = EvalMode.REAL_STRICT
COMPLEX = EvalMode.COMPLEX_PRINCIPAL



def in_domain(alphas, xs):
    """Grid pairs inside the real domain of the log branch."""
    return [(a, x) for a in alphas for x in xs if a >= 0 or x > real_domain_lower_bound(a)]

class TestAlpha:
    def test_is_real(self):
        assert Alpha(0.3, 0.0).is_real()
        assert not Alpha(0.3, 1e-300).is_real()

    @pytest.mark.parametrize("re, im", [(math.nan, 0.0), (0.0, math.inf)])
    def test_rejects_non_finite(self, re, im):
        with pytest.raises(NonFiniteInputError):
            Alpha(re, im)

    def test_of_complex(self):
        assert Alpha.of(2 - 1j) == Alpha(2.0, -1.0)
        assert complex(Alpha(1, 2)) == 1 + 2j


class TestSoftexp:
    def test_identity(self):
        assert softexp(0, 5) == 5

    def test_exp_endpoint(self):
        assert softexp(1, 1) == pytest.approx(math.e, rel=1e-15)

    def test_log_endpoint(self):
        assert softexp(-1, math.e) == pytest.approx(1.0, abs=1e-15)

    def test_log_branch_value(self):
        # 60-digit evaluation of -log(1 - a(x + a))/a at a=-0.5, x=1
        assert softexp(-0.5, 1) == pytest.approx(0.44628710262841951153, rel=1e-15)

    @pytest.mark.parametrize(
        "alpha, x",
        in_domain([-1.0, -0.7, -0.1, -1e-5, 1e-5, 0.2, 0.9, 1.0], [-2.5, -0.3, 0.0, 0.4, 1.7, 3.0]),
    )
    def test_matches_high_precision_oracle(self, alpha, x):
        expected = float(mp_softexp(alpha, x))
        assert softexp(alpha, x) == pytest.approx(expected, rel=1e-14, abs=1e-15)

    def test_domain_error_in_real_mode(self):
        with pytest.raises(DomainError):
            softexp(-1, -1)
        with pytest.raises(DomainError):
            softexp(-1, 0.0)

    def test_complex_mode_uses_principal_log(self):
        assert softexp(-1, -1, COMPLEX) == pytest.approx(complex(0, math.pi))
        assert softexp(-1, -4, COMPLEX) == pytest.approx(complex(math.log(4), math.pi))

    def test_zero_argument_is_error_in_any_mode(self):
        with pytest.raises(DomainError):
            softexp(-1, 0.0, COMPLEX)

    def test_non_finite(self):
        with pytest.raises(NonFiniteInputError):
            softexp(0.5, math.nan)

    def test_overflow(self):
        with pytest.raises(RangeError):
            softexp(1.0, 1000.0)

    def test_rejects_complex_alpha(self):
        with pytest.raises(ValueError):
            softexp(1j, 1.0)


class TestComplex:
    def test_identity(self):
        assert softexp_complex(0j, 3 + 0j) == 3 + 0j

    def test_quarter_period(self):
        v = softexp_complex(2j, math.pi / 4)
        assert v.real == pytest.approx(0.5, abs=1e-15)
        # derived imaginary part w + (1 - cos(w x))/w
        assert v.imag == pytest.approx(2.5, abs=1e-15)

    def test_at_zero(self):
        assert softexp_complex(1j, 0.0) == pytest.approx(1j)

    @pytest.mark.parametrize("alpha", [0.3 + 0.4j, -0.6 + 1.1j, 2j, -0.2 - 0.5j, 0.8])
    @pytest.mark.parametrize("x", [-1.2 + 0.3j, 0.5, 2.0 - 1.0j])
    def test_matches_oracle(self, alpha, x):
        expected = complex(mp_softexp_complex(alpha, x))
        assert softexp_complex(alpha, x) == pytest.approx(expected, rel=1e-13, abs=1e-14)

    def test_negative_real_alpha_uses_log_branch(self):
        assert softexp_complex(-0.5, 1.0) == pytest.approx(softexp(-0.5, 1.0), rel=1e-15)

    def test_real_mode_rejects_negative_axis(self):
        with pytest.raises(DomainError):
            softexp_complex(-1.0, -2.0, REAL)
        # off the real axis the principal log is used even in real mode
        assert np.isfinite(softexp_complex(-1.0, -2.0 + 0.5j, REAL))

    @given(
        st.floats(-1.0, 1.0, allow_nan=False),
        st.floats(-3.0, 3.0, allow_nan=False),
    )
    def test_agrees_with_real_kernel(self, alpha, x):
        if alpha < 0 and x <= real_domain_lower_bound(alpha) + 1e-9:
            return
        expected = softexp(alpha, x)
        got = softexp_complex(alpha, x)
        assert abs(got - expected) <= 1e-12 * max(1.0, abs(expected))
        assert got.imag == 0.0

    def test_continuous_as_imaginary_part_vanishes(self):
        x = 1.3
        for w in (1e-3, 1e-6, 1e-9):
            assert abs(softexp_complex(complex(0, w), x) - x) < 2 * w * (1 + x * x)

    def test_overflow(self):
        with pytest.raises(RangeError):
            softexp_complex(1 + 1j, 2000.0)


class TestDerivatives:
    def test_dx_examples(self):
        assert dsoftexp_dx(0, 7) == 1
        assert dsoftexp_dx(1, 0) == 1
        assert dsoftexp_dx(-1, 2) == pytest.approx(0.5, rel=1e-15)
        fd = central_difference(lambda x: softexp(-1, x), 2.0)
        assert dsoftexp_dx(-1, 2) == pytest.approx(fd, rel=1e-8)

    def test_dalpha_examples(self):
        assert dsoftexp_dalpha(0, 2) == 3
        assert dsoftexp_dalpha(0, 0) == 1
        fd = central_difference(lambda a: softexp(a, 1.5), 0.3)
        assert dsoftexp_dalpha(0.3, 1.5) == pytest.approx(fd, rel=1e-6)
        # mpmath numerical derivative at 60 digits
        assert dsoftexp_dalpha(0.3, 1.5) == pytest.approx(2.5269810886711905983, rel=1e-14)

    @pytest.mark.parametrize(
        "alpha, x",
        in_domain([-0.9, -0.3, -1e-3, -1e-5, -1e-7, 1e-7, 1e-5, 1e-3, 0.4], [-2.0, -0.5, 0.0, 0.7, 2.5]),
    )
    def test_dalpha_against_high_precision_derivative(self, alpha, x):
        import mpmath

        with mpmath.mp.workdps(60):
            expected = mpmath.diff(lambda a: mp_softexp(a, x), mpmath.mpf(alpha))
        assert dsoftexp_dalpha(alpha, x) == pytest.approx(float(expected), rel=1e-12, abs=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            dsoftexp_dx(-1, -1)
        with pytest.raises(DomainError):
            dsoftexp_dalpha(-1, -1)

    def test_array_kernel_matches_scalar(self):
        alphas = np.array([-0.8, -1e-6, 0.0, 1e-6, 0.5])
        xs = np.array([0.5, -1.0, 2.0, 3.0, -0.4])
        f, dz, da = activate_with_grads(alphas, xs)
        for i, (a, x) in enumerate(zip(alphas, xs)):
            assert f[i] == pytest.approx(softexp(a, x), rel=1e-14)
            assert dz[i] == pytest.approx(dsoftexp_dx(a, x), rel=1e-14)
            assert da[i] == pytest.approx(dsoftexp_dalpha(a, x), rel=1e-13)

    def test_complex_kernel_derivatives_are_holomorphic(self):
        a, z = 0.3 - 0.8j, 0.6 + 0.2j
        _, dz, da = activate_with_grads(np.array([a]), np.array([z]))
        h = 1e-6
        fd_z = (activate(a, z + h) - activate(a, z - h)) / (2 * h)
        fd_a = (activate(a + h, z) - activate(a - h, z)) / (2 * h)
        assert dz[0] == pytest.approx(complex(fd_z), rel=1e-8)
        assert da[0] == pytest.approx(complex(fd_a), rel=1e-8)


class TestFamilies:
    def test_linexp(self):
        assert g_linexp(0, 4) == 4
        assert g_linexp(1, 1) == pytest.approx(math.e, rel=1e-15)
        assert g_linexp(0.5, 2) == pytest.approx(3.9365636569180904707, rel=1e-15)

    def test_loglin(self):
        assert g_loglin(0, 9) == 9
        assert g_loglin(1, math.e) == pytest.approx(1.0, rel=1e-15)
        with pytest.raises(DomainError):
            g_loglin(1, -5)

    @given(st.floats(-1.0, 1.0), st.floats(-3.0, 3.0))
    def test_round_trip(self, alpha, x):
        y = g_linexp(alpha, x)
        assert g_loglin(alpha, y) == pytest.approx(x, abs=1e-12, rel=1e-12)

    @given(st.floats(0.01, 1.0), st.floats(-3.0, 3.0))
    def test_log_branch_is_loglin_reflected(self, beta, x):
        if x <= real_domain_lower_bound(-beta):
            return
        assert softexp(-beta, x) == pytest.approx(g_loglin(beta, x), rel=1e-13, abs=1e-13)


class TestAddMul:
    def test_endpoints(self):
        assert addmul(0, 3, 7) == 10
        assert addmul(1, 3, 7) == pytest.approx(21, rel=1e-14)

    def test_midpoint(self):
        # nested formula at 60 digits gives exactly 2*(2.25*4.25 - 1) + 0.5
        assert addmul(0.5, 3, 7) == pytest.approx(17.625, rel=1e-14)

    def test_beyond_unit_interval(self):
        assert np.isfinite(addmul(1.5, 3, 7))

    def test_domain_error_propagates(self):
        with pytest.raises(DomainError):
            addmul(1, -3, 7)

    @settings(max_examples=200)
    @given(st.floats(0.5, 10.0), st.floats(0.5, 10.0))
    def test_add_and_multiply(self, p, q):
        assert addmul(0, p, q) == pytest.approx(p + q, rel=1e-9)
        assert addmul(1, p, q) == pytest.approx(p * q, rel=1e-9)


class TestDomainBound:
    @pytest.mark.parametrize("alpha, bound", [(-1, 0.0), (-0.5, -1.5), (-2, 1.5)])
    def test_values(self, alpha, bound):
        assert real_domain_lower_bound(alpha) == bound

    @pytest.mark.parametrize("alpha", [-2.0, -1.0, -0.5, -0.1])
    def test_bound_is_sharp(self, alpha):
        b = real_domain_lower_bound(alpha)
        x_in = b + 1e-9 * max(1.0, abs(b))
        assert np.isfinite(softexp(alpha, x_in))
        with pytest.raises(DomainError):
            softexp(alpha, b - 1e-9 * max(1.0, abs(b)))

    def test_requires_negative(self):
        with pytest.raises(ValueError):
            real_domain_lower_bound(0.5)


class TestProperties:
    @given(st.floats(-1.0, 1.0), st.floats(-3.0, 3.0), st.floats(1e-6, 2.0))
    def test_monotone(self, alpha, x1, gap):
        x2 = x1 + gap
        if alpha < 0 and x1 <= real_domain_lower_bound(alpha) + 1e-6:
            return
        assert softexp(alpha, x1) < softexp(alpha, x2)

    @given(st.floats(1e-3, 1.0), st.floats(-3.0, 3.0))
    def test_negating_alpha_inverts(self, alpha, x):
        for a in (alpha, -alpha):
            try:
                y = softexp(a, x)
                back = softexp(-a, y)
            except DomainError:
                continue
            assert back == pytest.approx(x, abs=1e-9)

    @pytest.mark.parametrize("x", np.linspace(-5, 5, 11))
    def test_seam(self, x):
        for a in (1e-8, -1e-8):
            assert abs(softexp(a, x) - x) <= 1e-6
            assert abs(dsoftexp_dx(a, x) - 1) <= 1e-6
            assert abs(dsoftexp_dalpha(a, x) - (x * x / 2 + 1)) <= 1e-4
