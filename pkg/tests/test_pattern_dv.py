import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_genlaguerre, gammaln

from nqptomo.pattern_dv import DvPatternEvaluator, laguerre_recurrence


def quad_reference(k, l, x):
    """Direct adaptive quadrature of the defining oscillatory integral."""
    delta = l - k
    pref = math.exp(0.5 * (gammaln(k + 1) - gammaln(l + 1)))

    def part(trig):
        return integrate.quad(
            lambda u: abs(u) * u ** delta * eval_genlaguerre(k, delta, u * u)
            * np.exp(-0.5 * u * u) * trig(u * x),
            -14, 14, epsabs=1e-12, epsrel=1e-12, limit=400)[0]

    return (1j) ** (k - l) * pref * (part(np.cos) + 1j * part(np.sin))


def test_laguerre_recurrence_vs_scipy():
    z = np.linspace(0.0, 150.0, 11)
    for k, a in ((0, 0), (1, 3), (4, 1), (7, 0), (9, 5)):
        ref = eval_genlaguerre(k, a, z)
        got = laguerre_recurrence(k, a, z)
        np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-10)


def test_f00_at_zero_is_two(dv3):
    # L_0 = 1, so f00(0) = int |u| e^{-u^2/2} du = 2 exactly
    assert dv3.radial(0, 0, 0.0) == pytest.approx(2.0, abs=1e-6)


def test_diagonal_real_even(dv3):
    rng = np.random.default_rng(12)
    for k in range(3):
        xs = rng.uniform(-6, 6, 100)
        vals = dv3.radial(k, k, xs)
        assert np.all(np.isreal(vals))
        np.testing.assert_allclose(dv3.radial(k, k, -xs), vals, atol=1e-10)


def test_fft_vs_quadrature(dv3):
    rng = np.random.default_rng(8)
    for _ in range(12):
        x = float(rng.uniform(-6, 6))
        k = int(rng.integers(0, 3))
        l = int(rng.integers(k, 3))
        ref = quad_reference(k, l, x)
        assert abs(ref.imag) < 1e-9  # radial parts are real
        assert dv3.radial(k, l, x) == pytest.approx(ref.real, abs=1e-6)


def test_parity_under_u_negation(dv3):
    # substituting u -> -u in the integral gives f(-x) = (-1)^(k-l) f(x)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = float(rng.uniform(-5, 5))
        k = int(rng.integers(0, 3))
        l = int(rng.integers(0, 3))
        sign = (-1.0) ** (k - l)
        assert dv3.radial(k, l, -x) == pytest.approx(
            sign * dv3.radial(k, l, x), abs=1e-10)


def test_full_pattern_phase_factor(dv3):
    x = 0.83
    v = dv3.value(0, 1, x, np.pi / 2)
    assert v == pytest.approx(dv3.radial(0, 1, x) * np.exp(-1j * np.pi / 2))
    assert dv3.value(1, 1, x, 0.7).imag == 0.0


def test_hermiticity(dv3):
    rng = np.random.default_rng(17)
    for _ in range(100):
        x = float(rng.uniform(-5, 5))
        phi = float(rng.uniform(0, np.pi))
        assert abs(dv3.value(1, 0, x, phi)
                   - np.conj(dv3.value(0, 1, x, phi))) < 1e-10


def test_phase_average_factor(dv3):
    assert dv3.phase_factor_avg(0, -0.1, 0.3) == 1.0
    # m - n = 1, I = 6: sin(pi/12)/(pi/12)
    z = np.pi / 12
    got = dv3.value_phase_averaged(1, 0, 0.5, 0.0, 6)
    want = dv3.radial(1, 0, 0.5) * math.sin(z) / z
    assert got == pytest.approx(want, rel=1e-12)
    assert abs(math.sin(z) / z - 0.98862) < 5e-6
    # large I limit
    f360 = dv3.phase_factor_avg(1, -np.pi / 720, np.pi / 720)
    assert abs(f360 - 1.0) < 1e-5


def test_asymmetric_bin_factor_matches_quadrature(dv3):
    lo, hi = 0.2, 0.9
    delta = 2
    ref = integrate.quad(lambda p: np.cos(delta * p), lo, hi)[0] \
        + 1j * integrate.quad(lambda p: np.sin(delta * p), lo, hi)[0]
    ref /= (hi - lo)
    assert dv3.phase_factor_avg(delta, lo, hi) == pytest.approx(ref, abs=1e-12)


def test_index_validation(dv3):
    with pytest.raises(IndexError):
        dv3.radial(0, 3, 0.0)
    with pytest.raises(ValueError):
        DvPatternEvaluator(d=11)


def test_higher_dimensions_build():
    ev = DvPatternEvaluator(d=5, du=1e-2, dx_target=5e-4)
    # spot check one high element against quadrature
    ref = quad_reference(2, 4, 1.1)
    assert ev.radial(2, 4, 1.1) == pytest.approx(ref.real, abs=5e-6)
