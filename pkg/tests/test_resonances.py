import math

import numpy as np
import pytest
from scipy.integrate import quad

from hypres.modes import Funnel, Model
from hypres.phase import zero_curve
from hypres.resonances import (OutOfRangeError, ResonanceEntry, ResonanceSet, SearchRegion,
                               background_lattice, counting_functions, find_mode_zeros,
                               mode_target, precise_target, resonance_set, rho_min)

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------- background lattices

def test_funnel_lattice_weyl_law():
    cf = counting_functions(background_lattice(Model.standard_funnel, 200.0, TWO_PI))
    assert abs(cf.N(200.0) / 200.0 ** 2 - math.pi / 2) < 0.05 * math.pi / 2


def test_funnel_lattice_points():
    rs = background_lattice("standard_funnel", 5.0, TWO_PI)
    pts = set((e.s.real, e.s.imag) for e in rs)
    assert (-1.0, 0.0) in pts and (-1.0, 4.0) in pts and (-3.0, -3.0) in pts
    assert all(e.multiplicity == 2 and e.mode == -1 for e in rs)
    assert all(abs(e.s - 0.5) <= 5.0 for e in rs)
    # omega = 2 pi / ell = 2: only even imaginary parts
    rs2 = background_lattice("standard_funnel", 5.0, math.pi)
    assert all(round(e.s.imag) % 2 == 0 for e in rs2)


@pytest.mark.parametrize("t", [1.0, 1.5, 2.49, 2.5, 7.3, 200.0])
def test_plane_lattice_counts(t):
    cf = counting_functions(background_lattice(Model.hyperbolic_plane, 200.0))
    assert cf.N(t) == (math.floor(t - 0.5) + 1) ** 2


def test_plane_lattice_weyl_law():
    cf = counting_functions(background_lattice(Model.hyperbolic_plane, 200.0))
    assert abs(cf.N(200.0) / 200.0 ** 2 - 1) < 0.02


def test_lattice_radius_one_is_empty():
    assert len(background_lattice(Model.standard_funnel, 1.0, TWO_PI)) == 0


def test_lattice_errors():
    with pytest.raises(ValueError):
        background_lattice(Model.standard_funnel, 0.5, TWO_PI)
    with pytest.raises(ValueError):
        background_lattice(Model.standard_funnel, 5.0)
    with pytest.raises(ValueError):
        background_lattice("truncated_funnel", 5.0, TWO_PI)


def test_standard_funnel_set_is_the_lattice():
    a = resonance_set(Funnel(TWO_PI, 0.0), 6.0)
    b = background_lattice(Model.standard_funnel, 6.0, TWO_PI)
    assert np.array_equal(a.points(), b.points())


# ---------------------------------------------------------------- counting functions

def test_counting_empty():
    cf = counting_functions(ResonanceSet([], 10.0, "truncated_funnel"))
    assert cf.N(5.0) == 0 and cf.Ntilde(5.0) == 0.0


def test_counting_single_resonance():
    cf = counting_functions(ResonanceSet([ResonanceEntry(complex(-0.5, 0), 1, 0)], 10.0, "x"))
    assert cf.N(0.999) == 0 and cf.N(1.0) == 1
    for a in (0.5, 1.0, 2.0, 7.5):
        assert cf.Ntilde(a) == pytest.approx(2 * math.log(max(a, 1.0)), abs=1e-14)


def test_ntilde_matches_staircase_quadrature():
    rs = background_lattice(Model.standard_funnel, 12.0, TWO_PI)
    cf = counting_functions(rs)
    a = 11.3
    jumps = np.unique(np.abs(rs.points() - 0.5))
    jumps = jumps[jumps < a]
    val, _ = quad(lambda t: 2 * cf.N(t) / t, 1.0, a, points=list(jumps), limit=500, epsabs=1e-11)
    assert cf.Ntilde(a) == pytest.approx(val, rel=1e-9)


def test_funnel_lattice_ntilde_law():
    cf = counting_functions(background_lattice(Model.standard_funnel, 200.0, TWO_PI))
    assert abs(cf.Ntilde(200.0) / 200.0 ** 2 - math.pi / 2) < 0.05 * math.pi / 2


def test_counting_out_of_range():
    cf = counting_functions(background_lattice(Model.standard_funnel, 10.0, TWO_PI))
    with pytest.raises(OutOfRangeError):
        cf.N(10.5)
    with pytest.raises(OutOfRangeError):
        cf.Ntilde(11.0)


# ---------------------------------------------------------------- truncated funnel set

def test_set_invariants(truncated_set_14):
    pts = truncated_set_14.points()
    mult = truncated_set_14.multiplicities()
    assert np.all(pts.real < 0.5)
    assert np.all(np.abs(pts - 0.5) <= 14.0)
    # conjugation closure with equal multiplicity
    for z, m in zip(pts, mult):
        j = np.argmin(np.abs(pts - z.conjugate()))
        assert abs(pts[j] - z.conjugate()) < 1e-10 and mult[j] == m
    # deduplicated within 1e-8
    d = np.abs(pts[:, None] - pts[None, :]) + np.eye(len(pts))
    assert d.min() >= 1e-8
    # modes k and -k coincide
    assert all(e.multiplicity % 2 == 0 for e in truncated_set_14 if e.mode >= 1)


def test_set_members_are_zeros(truncated_set_14, funnel_r1):
    for e in truncated_set_14.entries[::7]:
        g = precise_target(funnel_r1, e.mode)
        s = e.s if e.s.imag >= 0 else e.s.conjugate()
        near = np.real(g(np.array([s + 1e-3])))[0]
        # log|G| drops by ~log(1e-3 / |s - z|) at the refined zero
        assert np.real(g(np.array([s])))[0] < near - 15


def test_set_near_half_integer_listing(truncated_set_14):
    listed = set(e.s for e in truncated_set_14.near_half_integer)
    for e in truncated_set_14:
        m = round(0.5 - e.s.real)
        close = m >= 0 and abs(e.s - (0.5 - m)) < 1e-4
        assert close == (e.s in listed)
    assert len(listed) > 0


def test_counting_curve_is_a_staircase(truncated_set_14):
    cf = counting_functions(truncated_set_14)
    ts = np.linspace(0.5, 10.0, 60)
    ns = [cf.N(t) for t in ts]
    assert all(b >= a for a, b in zip(ns, ns[1:]))
    assert 100 <= cf.N(10.0) <= 1000


def test_mode_truncation_safety(truncated_set_14, funnel_r1):
    k_more = int(math.ceil(1.25 * truncated_set_14.k_max))
    more = resonance_set(funnel_r1, 14.0, k_max=k_more)
    assert more.total() == truncated_set_14.total()


def test_k_max_from_rho_min(funnel_r1):
    rm = rho_min(TWO_PI, 1.0)
    assert 0 < rm < 1
    # the minimum is a minimum of the sampled curve
    for th in np.linspace(0, math.pi / 2 - 1e-3, 7):
        assert zero_curve(th, TWO_PI, 1.0) >= rm - 1e-9


def test_small_truncation_approaches_lattice():
    rs = resonance_set(Funnel(TWO_PI, 0.05), 3.0)
    lat = background_lattice(Model.standard_funnel, 3.5, TWO_PI).points()
    pts = rs.points()
    assert len(pts) > 0
    assert max(np.min(np.abs(lat - z)) for z in pts) <= 0.2


def test_small_truncation_splits_double_points_like_sqrt_r0():
    # the k = 0 lattice points are double; a truncation at r0 splits them into two real zeros
    # at distance ~ sqrt(r0), so quartering r0 halves the splitting
    def spread(r0):
        zs = find_mode_zeros(Funnel(TWO_PI, r0), 0, SearchRegion(-6.0, 0.4, -0.37, 1.0))
        return max(min(abs(e.s.real + 1 + 2 * n) for n in range(4)) for e in zs)
    d1, d2 = spread(0.05), spread(0.0125)
    assert 0.2 < d1 < 0.4
    assert d2 / d1 == pytest.approx(0.5, abs=0.1)


# ---------------------------------------------------------------- mode zeros

def _winding(logf, x0, x1, y0, y1, n=6000):
    """Independent argument-principle count: dense boundary sampling and phase unwrapping."""
    t = np.linspace(0, 1, n, endpoint=False)
    path = np.concatenate([x0 + (x1 - x0) * t + 1j * y0, x1 + 1j * (y0 + (y1 - y0) * t),
                           x1 - (x1 - x0) * t + 1j * y1, x0 + 1j * (y1 - (y1 - y0) * t)])
    ph = np.unwrap(np.imag(logf(np.append(path, path[0]))))
    return int(round((ph[-1] - ph[0]) / (2 * math.pi)))


def test_k3_winding_equals_refined_count(funnel_r1):
    region = SearchRegion(-12.0, 0.4, -0.37, 12.0)
    zs = find_mode_zeros(funnel_r1, 3, region)
    count = _winding(mode_target(funnel_r1, 3), region.re_min, region.re_max, region.im_min, region.im_max)
    assert count == sum(e.multiplicity for e in zs) > 0


def test_k0_zeros_conjugation_symmetric(funnel_r1):
    zs = find_mode_zeros(funnel_r1, 0, SearchRegion(-8.0, 0.4, -6.0, 6.0))
    pts = np.array([e.s for e in zs])
    for z in pts:
        assert np.min(np.abs(pts - z.conjugate())) < 1e-8


def _curve_distance(s, k, ell, r0, thetas):
    # Re phi((1/2 - s)/k) = 0 and its conjugate, as points of the s-plane
    rho = np.array([zero_curve(th, ell, r0) for th in thetas])
    ok = np.isfinite(rho)
    c = 0.5 - k * rho[ok] * np.exp(1j * thetas[ok])
    curve = np.concatenate([c, c.conjugate()])
    return float(np.min(np.abs(curve - s)))


def test_mode7_localization(funnel_r1):
    zs = find_mode_zeros(funnel_r1, 7, SearchRegion(-20.0, 0.4, -0.37, 20.0))
    thetas = np.linspace(0, math.pi / 2, 400, endpoint=False)
    band = [e.s for e in zs if 5 <= abs(e.s.imag) <= 15]
    assert all(_curve_distance(s, 7, TWO_PI, 1.0, thetas) <= 0.5 for s in band)
    # the band is empty for this configuration; every off-axis zero obeys the same bound
    off = [e.s for e in zs if abs(e.s.imag) > 1e-6]
    assert off
    assert all(_curve_distance(s, 7, TWO_PI, 1.0, thetas) <= 0.5 for s in off)


def test_find_mode_zeros_errors(funnel_r1):
    with pytest.raises(ValueError):
        find_mode_zeros(funnel_r1, -1, SearchRegion(-2, 0, 0, 2))
    with pytest.raises(ValueError):
        SearchRegion(0, -1, 0, 1)
    with pytest.raises(ValueError):
        SearchRegion(-1, 0, 0, 1, grid_step=0)
    with pytest.raises(ValueError):
        resonance_set(funnel_r1, 61.0)
    with pytest.raises(ValueError):
        ResonanceEntry(0j, 0, 0)


def test_extended_set_invariants():
    rs = resonance_set(Funnel(TWO_PI, -0.5), 8.0)
    pts = rs.points()
    assert len(pts) > 0 and np.all(pts.real < 0.5)
    for z in pts:
        assert np.min(np.abs(pts - z.conjugate())) < 1e-10
