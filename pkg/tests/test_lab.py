import numpy as np
import pytest

from rescur.lab import (EpsPath, SweepPoint, sweep, extrapolate, fit_holder,
                        fit_power_exponent, monomial_section, half_z1_unit,
                        pt_sections, pt_test_form)


def test_path_validation():
    with pytest.raises(ValueError):
        EpsPath("spiral")
    with pytest.raises(ValueError):
        EpsPath("ray", ratio=1.5)
    with pytest.raises(ValueError):
        EpsPath("ray", start=0.0)
    with pytest.raises(ValueError):
        EpsPath("ray", rungs=0)


def test_path_points():
    p = EpsPath("ray", a=2.0, b=1.0, start=0.1, ratio=0.5, rungs=3)
    assert p.points() == [(0.2, 0.1), (0.1, 0.05), (0.05, 0.025)]
    q = EpsPath("parabolic", s1=2.0, s2=1.0, start=0.1, ratio=0.1, rungs=2)
    assert np.allclose(q.points(), [(0.01, 0.1), (0.0001, 0.01)])
    d = EpsPath("diag_pt", c=3.0, start=0.1, ratio=0.5, rungs=1)
    assert np.allclose(d.points(), [(1e-4, 0.03)])
    a = EpsPath("axis2", fixed=0.5, start=0.1, ratio=0.5, rungs=2)
    assert a.points() == [(0.5, 0.1), (0.5, 0.05)]


def test_path_labels_distinct():
    kinds = [EpsPath("ray", a=1, b=2), EpsPath("ray", a=2, b=1),
             EpsPath("parabolic", s1=1, s2=3), EpsPath("diag_pt", c=2),
             EpsPath("axis1", fixed=0.1)]
    labels = [p.label() for p in kinds]
    assert len(set(labels)) == len(labels)


def test_sweep_accepts_plain_values_and_results():
    class R:
        value = 1.0 + 2.0j
        error_estimate = 0.5
        nodes = 7
        wall_ms = 3.0

    path = EpsPath("ray", rungs=2)
    plain = sweep(lambda e1, e2: e1 + 1j * e2, path)
    assert plain[0].value == pytest.approx(0.1 + 0.1j)
    rich = sweep(lambda e1, e2: R(), path)
    assert rich[1].nodes == 7 and rich[1].error == 0.5


def test_extrapolate_geometric_series_is_exact():
    L = -1.5 + 0.25j
    vals = [L + 0.3 * 0.4 ** k for k in range(6)]
    series = [SweepPoint(1e-1 * 0.25 ** k, 1e-1 * 0.25 ** k, v)
              for k, v in enumerate(vals)]
    lim, err = extrapolate(series)
    assert abs(lim - L) < 1e-10
    assert err < 1e-4


def test_extrapolate_power_law_ladder():
    # F(eps) = L + C eps^(1/2) on a geometric ladder is a geometric error
    L = 2.0
    eps = [1e-1 * 0.25 ** k for k in range(8)]
    series = [SweepPoint(e, e, L + 0.7 * e ** 0.5) for e in eps]
    lim, err = extrapolate(series)
    assert abs(lim - L) < 1e-8


def test_extrapolate_needs_enough_rungs():
    series = [SweepPoint(1e-1, 1e-1, 1.0)] * 3
    with pytest.raises(ValueError):
        extrapolate(series)


def test_extrapolate_refuses_growing_series():
    series = [SweepPoint(0.1 * 0.5 ** k, 0.1, float(2 ** k))
              for k in range(6)]
    with pytest.raises(RuntimeError):
        extrapolate(series)


def test_holder_fit_quarter_power():
    eps = [1e-1 * 0.25 ** k for k in range(6)]
    series = [SweepPoint(e, e, 3.0 + 2.0 * e ** 0.25) for e in eps]
    fit = fit_holder(series, 3.0)
    assert abs(fit.exponent - 0.25) < 0.01
    assert fit.constant == pytest.approx(2.0, rel=1e-6)
    assert fit.residual < 1e-10


def test_holder_fit_log_correction():
    # sqrt(eps) |log eps| fits an effective exponent just below 1/2 on a
    # deep ladder
    eps = [1e-9 * 0.1 ** k for k in range(8)]
    series = [SweepPoint(e, e, 1.0 + e ** 0.5 * abs(np.log(e))) for e in eps]
    fit = fit_holder(series, 1.0)
    assert 0.45 <= fit.exponent <= 0.5


def test_holder_fit_needs_monotone_tail():
    series = [SweepPoint(0.1 * 0.5 ** k, 0.1, 1.0 + (-1.0) ** k)
              for k in range(6)]
    with pytest.raises(RuntimeError):
        fit_holder(series, 1.0)


def test_fit_power_exponent():
    eps = np.geomspace(1e-6, 1e-2, 9)
    vals = 3.0 * eps ** 0.75
    assert fit_power_exponent(eps, vals) == pytest.approx(0.75, abs=1e-10)
    # the tail argument keeps only the deepest entries
    vals2 = vals.copy()
    vals2[-1] *= 10.0
    assert fit_power_exponent(eps, vals2, tail=5) == pytest.approx(
        0.75, abs=1e-10)


def test_monomial_section_and_unit():
    s = monomial_section(2, (1, 0), unit=half_z1_unit(2))
    z = np.array([0.5 + 0.0j, 0.1j])
    assert s.values(z)[0] == pytest.approx(0.5 * 1.25)


def test_pt_ingredients():
    f, g = pt_sections()
    assert f.n == g.n == 2
    z = np.array([0.2 + 0.1j, 0.3 - 0.2j])
    assert f.values(z)[0] == pytest.approx(z[0] ** 4)
    assert g.values(z)[0] == pytest.approx(z[0] ** 2 + z[1] ** 2 + z[0] ** 3)
    phi = pt_test_form()
    assert phi.q == 0
    core = np.array([0.1 + 0.0j, 0.1 + 0.0j])
    want = (core[0] ** 2 + core[1] ** 2 + core[0] ** 3) * core[1].conjugate()
    assert phi.coefficients(core)[()] == pytest.approx(want)
