import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypres.specfun import (EvalOptions, PoleError, airy, airy_ai, hyp2f1_reg, log_gamma, rgamma)

mp.mp.dps = 50

finite = dict(allow_nan=False, allow_infinity=False)


def off_poles(z, d=1e-3):
    return not (z.real <= 0.5 and abs(z - round(z.real)) < d)


# ---------------------------------------------------------------- log_gamma

def test_log_gamma_closed_forms():
    assert abs(log_gamma(1.0)) < 1e-15
    assert abs(log_gamma(0.5) - 0.5723649429247001) < 1e-14


def test_log_gamma_against_multiprecision():
    z = 3 + 4j
    ref = complex(mp.loggamma(mp.mpc(3, 4)))
    assert abs(log_gamma(z) - ref) <= 1e-12 * abs(ref)


def test_log_gamma_grid_matches_mpmath(rng):
    z = rng.uniform(-30, 30, 400) + 1j * rng.uniform(-60, 60, 400)
    got = log_gamma(z)
    ref = np.array([complex(mp.loggamma(complex(v))) for v in z])
    assert np.max(np.abs(got - ref) / np.maximum(1, np.abs(ref))) < 1e-12


def test_log_gamma_pole_error():
    with pytest.raises(PoleError):
        log_gamma(-3.0)
    with pytest.raises(PoleError):
        log_gamma(0.0)


def test_log_gamma_branch_continuous_along_path():
    # a path passing between the poles in the left half plane
    t = np.linspace(0, 1, 2001)
    path = -7.5 + 15 * t + 1j * (0.3 + 2 * np.sin(np.pi * t))
    lg = log_gamma(path)
    assert np.max(np.abs(np.diff(lg.imag))) < 0.2


@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(max_magnitude=40, **finite))
def test_log_gamma_recurrence(z):
    if not off_poles(z) or not off_poles(z + 1) or abs(z) < 1e-3:
        return
    lhs = cmath.exp(log_gamma(z + 1) - log_gamma(z))
    assert abs(lhs - z) <= 1e-11 * abs(z)


@settings(max_examples=200, deadline=None)
@given(st.floats(-8, 8, **finite), st.floats(-3, 3, **finite))
def test_gamma_reflection(x, y):
    z = complex(x, y)
    if abs(z - round(x)) < 1e-3:
        return
    val = cmath.exp(log_gamma(z) + log_gamma(1 - z)) * cmath.sin(math.pi * z)
    assert abs(val - math.pi) <= 1e-10 * math.pi


def test_rgamma_zeros_and_values():
    assert rgamma(-3.0) == 0
    assert abs(rgamma(0.5) - 1 / math.sqrt(math.pi)) < 1e-15
    assert abs(rgamma(-2.5) - complex(mp.rgamma(-2.5))) < 1e-14


# ---------------------------------------------------------------- hypergeometric

def test_hyp2f1_reg_at_zero():
    assert abs(hyp2f1_reg(0.3 + 1j, 2.0, 0.5, 0.0) - 1 / math.sqrt(math.pi)) < 1e-15
    # entire in c: 1/Gamma(-2) = 0
    assert abs(hyp2f1_reg(0.3, 0.7, -2.0, 0.0)) < 1e-15


def test_hyp2f1_reg_log_reduction():
    assert abs(hyp2f1_reg(1.0, 1.0, 2.0, -1.0) - math.log(2)) < 1e-14


def _reg_mp(a, b, c, z):
    return complex(mp.hyp2f1(a, b, c, z) * mp.rgamma(c))


def test_hyp2f1_reg_resonance_argument_against_mpmath():
    s, k, om = -2 + 3j, 2, 1.0
    a, b, c = (1 + s + 1j * om * k) / 2, (s + 1j * om * k) / 2, 0.5 + s
    z = -1 / math.sinh(1.0) ** 2
    # independent route: Pfaff transformation, then the plain series at 50 digits
    x = z / (z - 1)
    ref = (1 - mp.mpf(z)) ** (-mp.mpc(a)) * mp.hyp2f1(a, mp.mpc(c) - b, c, x) * mp.rgamma(c)
    got = hyp2f1_reg(a, b, c, z)
    assert abs(got - complex(ref)) <= 1e-10 * abs(complex(ref))


def test_hyp2f1_reg_mode_parameters_random(rng):
    worst = 0.0
    for _ in range(60):
        s = complex(rng.uniform(-15, 15), rng.uniform(-30, 30))
        k = int(rng.integers(0, 30))
        r = rng.uniform(0.05, 5)
        for a, b, c, z in [((s + 1j * k) / 2, (1 - s + 1j * k) / 2, 0.5, -math.sinh(r) ** 2),
                           ((1 + s + 1j * k) / 2, (2 - s + 1j * k) / 2, 1.5, -math.sinh(r) ** 2),
                           ((1 + s + 1j * k) / 2, (s + 1j * k) / 2, 0.5 + s, -1 / math.sinh(r) ** 2)]:
            ref = _reg_mp(a, b, c, z)
            worst = max(worst, abs(hyp2f1_reg(a, b, c, z) - ref) / abs(ref))
    assert worst < 1e-10


def test_hyp2f1_reg_large_mode_index():
    # parameters typical of k ~ 100 window coefficients near x = 1 after Pfaff
    s, k = 0.5 + 12 * cmath.exp(1j * math.pi / 4), 100
    a, b, c, z = (1 + s + 1j * k) / 2, (2 - s + 1j * k) / 2, 1.5, -math.sinh(2.5) ** 2
    ref = _reg_mp(a, b, c, z)
    assert abs(hyp2f1_reg(a, b, c, z) - ref) <= 1e-10 * abs(ref)


def test_hyp2f1_reg_degenerate_k0():
    # c - a - b = 0 after Pfaff for k = 0 (logarithmic case)
    s = 0.3 + 2j
    for r in (0.5, 2.0, 4.0):
        a, b, c, z = s / 2, (1 - s) / 2, 0.5, -math.sinh(r) ** 2
        ref = _reg_mp(a, b, c, z)
        assert abs(hyp2f1_reg(a, b, c, z) - ref) <= 1e-9 * abs(ref)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3, **finite), st.floats(-3, 3, **finite), st.floats(-3, 3, **finite),
       st.floats(-3, 3, **finite), st.floats(0.6, 2.5, **finite), st.floats(-20, -0.01, **finite))
def test_gauss_contiguous_relation(ar, ai, br, bi, c, z):
    # c(c-1)(z-1) F(c-1) + c[c-1-(2c-a-b-1)z] F(c) + (c-a)(c-b) z F(c+1) = 0 with unregularized F
    a, b = complex(ar, ai), complex(br, bi)
    F = lambda cc: hyp2f1_reg(a, b, cc, z) * math.gamma(cc)
    t1 = c * (c - 1) * (z - 1) * F(c - 1)
    t2 = c * (c - 1 - (2 * c - a - b - 1) * z) * F(c)
    t3 = (c - a) * (c - b) * z * F(c + 1)
    scale = max(abs(t1), abs(t2), abs(t3))
    assert abs(t1 + t2 + t3) <= 1e-9 * scale


def test_hyp2f1_rejects_positive_argument():
    with pytest.raises(ValueError):
        hyp2f1_reg(1, 1, 2, 0.5)


def test_eval_options_validation():
    with pytest.raises(ValueError):
        EvalOptions(rel_tol=1e-17)


# ---------------------------------------------------------------- Airy

def test_airy_at_zero():
    assert abs(airy_ai(0) - 3 ** (-2 / 3) / math.gamma(2 / 3)) < 1e-15
    assert abs(airy_ai(0) - 0.3550280539) < 1e-10


def _ai_series(z, terms=80):
    # Maclaurin series in 40-digit arithmetic
    z = mp.mpc(z)
    c1 = mp.mpf(3) ** (-mp.mpf(2) / 3) / mp.gamma(mp.mpf(2) / 3)
    c2 = mp.mpf(3) ** (-mp.mpf(1) / 3) / mp.gamma(mp.mpf(1) / 3)
    f, g = mp.mpf(0), mp.mpf(0)
    tf, tg = mp.mpf(1), z
    for n in range(terms):
        f += tf
        g += tg
        tf *= z ** 3 / ((3 * n + 2) * (3 * n + 3))
        tg *= z ** 3 / ((3 * n + 3) * (3 * n + 4))
    return complex(c1 * f - c2 * g)


def test_airy_at_one_against_series():
    ref = _ai_series(1.0)
    assert abs(airy_ai(1.0) - ref) <= 1e-12 * abs(ref)


def test_airy_connection_identity():
    w = cmath.exp(2j * math.pi / 3)
    z = 2 + 1j
    res = airy_ai(z) + w * airy_ai(w * z) + w.conjugate() * airy_ai(w.conjugate() * z)
    assert abs(res) <= 1e-11


@pytest.mark.parametrize("z", [2 + 1j, 4, -4, 5 * cmath.exp(2.5j), 7 * cmath.exp(1j), 8j, -8 + 1j,
                               12, -12, 25 * cmath.exp(2j), 40 * cmath.exp(-1j)])
def test_airy_against_mpmath(z):
    ref = complex(mp.airyai(z))
    assert abs(airy_ai(z) - ref) <= 1e-12 * abs(ref)


def test_airy_derivative_against_mpmath():
    for z in (0.7 - 2j, -6 + 0.5j, 9 * cmath.exp(0.4j)):
        ref = complex(mp.airyai(z, derivative=1))
        assert abs(airy(z)[1] - ref) <= 1e-11 * abs(ref)


def test_airy_leading_asymptotics():
    # Ai(z) ~ exp(-xi)/(2 sqrt(pi) z^{1/4}), xi = (2/3) z^{3/2}; relative error <= C |z|^{-3/2}
    ratios = []
    for mod in (20.0, 30.0, 40.0):
        for ang in np.linspace(-(math.pi - 0.2), math.pi - 0.2, 9):
            z = mod * cmath.exp(1j * ang)
            xi = 2 / 3 * z ** 1.5
            lead = cmath.exp(-xi) / (2 * math.sqrt(math.pi) * z ** 0.25)
            ratios.append(abs(airy_ai(z) / lead - 1) * mod ** 1.5)
    # the first correction coefficient is 5/72
    assert max(ratios) < 0.2
