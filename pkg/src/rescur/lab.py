"""Parameter-path sweeps, limit extrapolation and Holder-exponent fits.

A sweep walks a geometric ladder along a path in the (eps1, eps2) plane,
evaluating one regularized integral per rung.  Limits are estimated by
iterated Aitken acceleration (robust for geometrically decaying error
terms with unknown rate), and Holder exponents by a least-squares slope
on the longest monotone tail of log|F - limit| vs log eps.  Both report
conservative error indicators rather than certified bounds.
"""

import math

import numpy as np

from .algebra import MixedPoly
from .superforms import SectionTuple
from .testforms import TestForm, FlatBump

PATH_KINDS = ("ray", "parabolic", "axis1", "axis2", "diag_pt")

# fixed CSV column order for experiment output rows
ROW_FIELDS = ("experiment_id", "variant", "path", "eps1", "eps2",
              "value_re", "value_im", "error", "nodes", "wall_ms")


class EpsPath:
    """Geometric ladder along a path in the positive quadrant.

    kinds: ray(a, b): (a t, b t); parabolic(s1, s2): (t^s1, t^s2);
    axis1/axis2: one coordinate walks the ladder, the other stays at
    `fixed`; diag_pt(c): (t^4, c t^2), the discontinuity-experiment path.
    """

    def __init__(self, kind, a=1.0, b=1.0, s1=1.0, s2=1.0, c=1.0,
                 fixed=1e-2, start=1e-1, ratio=0.25, rungs=6):
        if kind not in PATH_KINDS:
            raise ValueError(f"unknown path kind {kind!r}")
        if not 0 < ratio < 1 or start <= 0 or rungs < 1:
            raise ValueError("need start > 0, 0 < ratio < 1, rungs >= 1")
        self.kind = kind
        self.a, self.b = float(a), float(b)
        self.s1, self.s2 = float(s1), float(s2)
        self.c = float(c)
        self.fixed = float(fixed)
        self.start, self.ratio, self.rungs = float(start), float(ratio), \
            int(rungs)

    def parameters(self):
        return [self.start * self.ratio ** k for k in range(self.rungs)]

    def points(self):
        out = []
        for t in self.parameters():
            if self.kind == "ray":
                p = (self.a * t, self.b * t)
            elif self.kind == "parabolic":
                p = (t ** self.s1, t ** self.s2)
            elif self.kind == "axis1":
                p = (t, self.fixed)
            elif self.kind == "axis2":
                p = (self.fixed, t)
            else:
                p = (t ** 4, self.c * t ** 2)
            out.append(p)
        return out

    def label(self):
        bits = [self.kind]
        if self.kind == "ray":
            bits.append(f"{self.a:g}:{self.b:g}")
        elif self.kind == "parabolic":
            bits.append(f"{self.s1:g}:{self.s2:g}")
        elif self.kind == "diag_pt":
            bits.append(f"c={self.c:g}")
        else:
            bits.append(f"fixed={self.fixed:g}")
        return "_".join(bits)

    def key(self):
        return ("path", self.kind, self.a, self.b, self.s1, self.s2,
                self.c, self.fixed, self.start, self.ratio, self.rungs)


class SweepPoint:
    def __init__(self, eps1, eps2, value, error=0.0, nodes=0, wall_ms=0.0):
        self.eps1 = eps1
        self.eps2 = eps2
        self.value = complex(value)
        self.error = float(error) if error is not None else 0.0
        self.nodes = int(nodes)
        self.wall_ms = float(wall_ms)


def sweep(runner, path):
    """Evaluate runner(eps1, eps2) on every rung of the path.

    runner may return a complex value or a quadrature result carrying
    value/error_estimate/nodes/wall_ms.
    """
    out = []
    for e1, e2 in path.points():
        r = runner(e1, e2)
        if hasattr(r, "value"):
            out.append(SweepPoint(e1, e2, r.value, r.error_estimate,
                                  r.nodes, r.wall_ms))
        else:
            out.append(SweepPoint(e1, e2, r))
    return out


def _aitken(seq):
    d2 = seq[2:] - 2.0 * seq[1:-1] + seq[:-2]
    num = (seq[2:] - seq[1:-1]) ** 2
    out = seq[2:].copy()
    ok = np.abs(d2) > 1e-14 * np.maximum(1e-300, np.abs(seq[2:]))
    out[ok] = seq[2:][ok] - num[ok] / d2[ok]
    return out


def extrapolate(series):
    """Iterated-Aitken limit of a sweep with a conservative error bar."""
    vals = np.array([p.value for p in series], dtype=complex)
    if vals.size < 4:
        raise ValueError("need at least 4 rungs to extrapolate")
    deltas = np.abs(np.diff(vals))
    if vals.size >= 5 and np.all(np.diff(deltas) > 0) and deltas[-1] > 0:
        raise RuntimeError("series is not settling (deltas grow); "
                           "cannot extrapolate a limit")
    # keep the acceleration stage whose tail has settled best; a further
    # Aitken step can amplify noise once the differences reach the
    # quadrature error floor
    cur = vals
    best = (abs(cur[-1] - cur[-2]), cur[-1])
    stages = 0
    while cur.size >= 3 and stages < 2:
        cur = _aitken(cur)
        stages += 1
        if cur.size >= 2:
            d = abs(cur[-1] - cur[-2])
            if d < best[0]:
                best = (d, cur[-1])
    err, limit = best
    err = max(err, abs(limit - vals[-1]) * 1e-3)
    return limit, err


class HolderFit:
    def __init__(self, exponent, constant, residual, window):
        self.exponent = exponent
        self.constant = constant
        self.residual = residual
        self.window = window

    def __repr__(self):
        return (f"HolderFit(omega={self.exponent:.4f}, C={self.constant:.3g},"
                f" residual={self.residual:.2g}, window={self.window})")


def fit_holder(series, limit):
    """Lower-bound Holder exponent from the monotone tail of a sweep.

    Fits log|F(eps) - limit| = log C + omega log eps over the longest
    suffix on which the distance decreases, with eps = max(eps1, eps2) as
    the distance to the origin along the path.
    """
    eps = np.array([max(p.eps1, p.eps2) for p in series])
    dist = np.array([abs(p.value - limit) for p in series])
    keep = dist > 0
    eps, dist = eps[keep], dist[keep]
    start = len(dist) - 1
    while start > 0 and dist[start - 1] > dist[start]:
        start -= 1
    if len(dist) - start < 3:
        raise RuntimeError("no monotone tail of length >= 3; cannot fit a "
                           "Holder exponent")
    le, ld = np.log(eps[start:]), np.log(dist[start:])
    coef = np.polyfit(le, ld, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coef, le) - ld) ** 2)))
    return HolderFit(float(coef[0]), float(math.exp(coef[1])), resid,
                     (int(start), len(series)))


def fit_power_exponent(eps, vals, tail=None):
    """Least-squares slope of log vals vs log eps, optionally on the
    deepest `tail` entries (eps assumed sorted increasing)."""
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if tail is not None:
        eps, vals = eps[:tail], vals[:tail]
    return float(np.polyfit(np.log(eps), np.log(vals), 1)[0])


# standard experiment ingredients -------------------------------------------

def monomial_section(n, alpha, unit=None, **kw):
    """Section z^alpha (optionally times a non-vanishing holomorphic unit)."""
    return SectionTuple([MixedPoly.monomial(n, alpha)], unit_factor=unit, **kw)


def half_z1_unit(n):
    """The unit 1 + z_1/2, non-vanishing on the unit polydisc."""
    return MixedPoly.constant(n, 1.0) + 0.5 * MixedPoly.variable(n, 0)


def pt_sections():
    """The discontinuity example pair f = z1^4, g = z1^2 + z2^2 + z1^3."""
    f = SectionTuple([MixedPoly.monomial(2, (4, 0))])
    gp = MixedPoly.monomial(2, (2, 0)) + MixedPoly.monomial(2, (0, 2)) \
        + MixedPoly.monomial(2, (3, 0))
    return f, SectionTuple([gp])


def pt_test_form(bump=None):
    """rho(|z1|^2) rho(|z2|^2) conj(z2) g dz1 ^ dz2, anti-degree 0."""
    bump = bump if bump is not None else FlatBump()
    gp = MixedPoly.monomial(2, (2, 0)) + MixedPoly.monomial(2, (0, 2)) \
        + MixedPoly.monomial(2, (3, 0))
    poly = gp * MixedPoly.monomial(2, (0, 0), 1.0, J=(0, 1))
    return TestForm.bump_form(2, poly=poly, T=(), bump=bump)
