import math

import numpy as np
import pytest

from rescur.quadrature import (GridSpec, integrate_polydisc, torus_radii,
                               integrate_torus_monomial, integrate_pt_cycle,
                               integrate_pt_cycle_batch, fubini_average,
                               pt_bm_pair_exact_theta2)
from rescur.testforms import TestForm, FlatBump


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, n_theta=2)
    with pytest.raises(ValueError):
        GridSpec(1, grading=0.5)
    with pytest.raises(ValueError):
        GridSpec(1, radius=0.0)
    with pytest.raises(ValueError):
        GridSpec(2, n_theta=(8, 8, 8))
    with pytest.raises(ValueError):
        GridSpec(2, splits=((0.5,),))


def test_gridspec_per_axis_and_splits():
    g = GridSpec(2, radius=(0.5, 1.0), n_theta=(8, 16), splits=((), (0.3,)))
    assert g.radius == (0.5, 1.0)
    r, w = g.axis_radial(1)
    assert r.size > g.axis_radial(0)[0].size  # the split adds a panel
    assert np.all(w > 0)


def test_disc_area_and_moment_exact():
    # integral of 1 over the disc of radius R is pi R^2; of |z|^2 is
    # pi R^4 / 2; both are polynomial in r so GL panels are exact
    R = 0.7
    g = GridSpec(1, radius=R, n_theta=8, panels=4, grading=2.0, gl_order=8)
    area = integrate_polydisc(lambda z: np.ones(z.shape[1]), g,
                              with_error=False)
    assert area.value == pytest.approx(math.pi * R ** 2, rel=1e-13)
    mom = integrate_polydisc(lambda z: (z[0] * z[0].conjugate()).real, g,
                             with_error=False)
    assert mom.value == pytest.approx(math.pi * R ** 4 / 2.0, rel=1e-13)


def test_angular_rule_kills_unbalanced_monomials():
    g = GridSpec(1, radius=1.0, n_theta=16, panels=4, gl_order=6)
    res = integrate_polydisc(lambda z: z[0] ** 3 * z[0].conjugate(), g,
                             with_error=False)
    assert abs(res.value) < 1e-13


def test_polydisc_bit_reproducible():
    g = GridSpec(2, radius=0.8, n_theta=12, panels=6, gl_order=6)
    f = lambda z: np.exp(-(np.abs(z) ** 2).sum(axis=0)) / (np.abs(z[0]) + 0.1)
    a = integrate_polydisc(f, g)
    b = integrate_polydisc(f, g)
    assert a.value == b.value
    assert a.error_estimate == b.error_estimate
    assert a.nodes == b.nodes


def test_chunking_does_not_change_the_value():
    g = GridSpec(2, radius=0.8, n_theta=8, panels=4, gl_order=6)
    f = lambda z: z[0] * z[0].conjugate() + 0.5
    a = integrate_polydisc(f, g, with_error=False)
    b = integrate_polydisc(f, g, chunk=37, with_error=False)
    assert a.value == pytest.approx(b.value, rel=1e-14)


def test_error_estimate_tracks_roughness():
    g = GridSpec(1, radius=1.0, n_theta=8, panels=3, gl_order=4)
    smooth = integrate_polydisc(lambda z: np.ones(z.shape[1]), g)
    rough = integrate_polydisc(
        lambda z: 1.0 / (np.abs(z[0]) + 1e-3), g)
    assert smooth.error_estimate < 1e-12
    assert rough.error_estimate > smooth.error_estimate


def test_torus_radii():
    r = torus_radii((1, 0), (0, 1), 0.04, 0.09)
    assert np.allclose(r, [0.2, 0.3])
    with pytest.raises(ValueError):
        torus_radii((1, 1), (2, 2), 0.1, 0.1)


def test_torus_monomial_cycle_value():
    # for f = z1, g = z2 and a flat-core test form the cycle integral is
    # exactly (i)^2 (2 pi)^2 = -4 pi^2
    phi = TestForm.bump_form(2, T=())
    v = integrate_torus_monomial((1, 0), (0, 1), 1e-4, 1e-4, phi, n_theta=16)
    assert v == pytest.approx(-4.0 * math.pi ** 2, rel=1e-12)


def test_torus_outside_support_is_zero():
    phi = TestForm.bump_form(2, T=())
    with pytest.warns(UserWarning):
        v = integrate_torus_monomial((1, 0), (0, 1), 4.0, 4.0, phi)
    assert v == 0.0


def test_pt_cycle_parameter_validation():
    with pytest.raises(ValueError):
        integrate_pt_cycle(-1e-3, 1e-3, FlatBump())
    with pytest.raises(ValueError):
        integrate_pt_cycle(1e-3, 0.0, FlatBump())


def test_pt_cycle_outside_support_is_zero():
    b = FlatBump()
    assert integrate_pt_cycle(0.99, 1e-3, b) == 0.0
    # sqrt(eps2) beyond the bump support plus the curve amplitude
    assert integrate_pt_cycle(1e-4, 4.0, b) == 0.0


def test_pt_cycle_branch_point_refused():
    b = FlatBump()
    r1 = 0.5
    c0 = r1 ** 2 + r1 ** 3
    with pytest.raises(RuntimeError):
        integrate_pt_cycle(r1 ** 8, c0 ** 2, b, n_theta=64)


def test_pt_cycle_batch_matches_single():
    b = FlatBump()
    eps2s = np.array([3e-3, 2e-2, 1e-1])
    batch = integrate_pt_cycle_batch(1e-4, eps2s, b)
    for e2, v in zip(eps2s, batch):
        assert integrate_pt_cycle(1e-4, e2, b) == v


def test_pt_cycle_angular_convergence():
    b = FlatBump()
    v1 = integrate_pt_cycle(1e-4, 1e-2, b, n_theta=512)
    v2 = integrate_pt_cycle(1e-4, 1e-2, b, n_theta=1024)
    assert abs(v1 - v2) < 1e-3 * max(1.0, abs(v2))


def test_pt_bm_pair_coarse_consistency():
    # the reduced 3-d integral agrees with itself across resolutions
    b = FlatBump()
    g = GridSpec(2, radius=b.outer, n_theta=(96, 4), panels=(8, 20),
                 grading=(3.0, 1.0), gl_order=8)
    res = pt_bm_pair_exact_theta2(1e-2, 1e-2, b, grid3=g)
    assert res.error_estimate < 1e-3 * abs(res.value)


def _kernel_factor(e, T):
    # integral of e (1 - t/T)^2 / (t+e)^2 over [0, T], in closed form
    u0, u1 = e, T + e
    return e / T ** 2 * (u1 ** 2 * (1.0 / u0 - 1.0 / u1)
                         - 2.0 * u1 * math.log(u1 / u0) + T)


def test_fubini_average_separable_closed_form():
    T1, T2 = 0.8, 0.6
    e1, e2 = 1e-3, 2e-3

    def sampler(t1, t2):
        a = max(0.0, 1.0 - t1 / T1) ** 2
        b = max(0.0, 1.0 - t2 / T2) ** 2
        return a * b

    got = fubini_average(e1, e2, sampler, (T1, T2))
    want = _kernel_factor(e1, T1) * _kernel_factor(e2, T2)
    assert got == pytest.approx(want, rel=1e-8)


def test_fubini_average_batch_sampler_agrees():
    T1, T2 = 0.8, 0.6

    def sampler(t1, t2):
        return max(0.0, 1.0 - t1 / T1) ** 2 * max(0.0, 1.0 - t2 / T2) ** 2

    def batch(t1, t2s):
        return np.array([sampler(t1, t2) for t2 in t2s])

    a = fubini_average(1e-3, 2e-3, sampler, (T1, T2))
    b = fubini_average(1e-3, 2e-3, None, (T1, T2), batch_sampler=batch)
    assert a == pytest.approx(b, rel=1e-13)


def test_fubini_average_detects_undecayed_sampler():
    # a sampler that has not decayed at the support bound must be refused
    with pytest.raises(RuntimeError):
        fubini_average(1e-3, 1e-3, lambda t1, t2: 1.0, (0.5, 0.5))
