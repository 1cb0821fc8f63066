"""Deterministic quadrature for polydisc, torus and residue-cycle integrals.

Polydisc integrals use tensor-product polar grids: per axis a panelled
Gauss-Legendre radial rule graded toward r = 0 and a uniform angular rule
(exact on trigonometric polynomials below the node count).  Evaluation is
chunked over the flattened tensor grid with a fixed reduction order, so
results are bit-reproducible.

Also here: the torus cycle for a pair of monomials, the residue cycle for
the quartic/sphere-like pair (f, g) = (z1^4, z1^2 + z2^2 + z1^3) used in
the discontinuity experiments, and the averaging kernel that represents a
smoothly regularized pair integral as a weighted mean of raw cycle values.
"""

import math
import time
import warnings

import numpy as np

from .algebra import MultiIndex


class GridSpec:
    """Per-axis polar tensor grid description.

    radius, n_theta, panels, grading, gl_order may be scalars (shared by
    all axes) or length-n sequences.  splits is an optional per-axis tuple
    of extra radial breakpoints (e.g. a known transition radius).
    """

    def __init__(self, n, radius=1.0, n_theta=64, panels=8, grading=2.0,
                 gl_order=8, splits=None):
        self.n = int(n)
        self.radius = self._per_axis(radius, float)
        self.n_theta = self._per_axis(n_theta, int)
        self.panels = self._per_axis(panels, int)
        self.grading = self._per_axis(grading, float)
        self.gl_order = self._per_axis(gl_order, int)
        if splits is None:
            self.splits = tuple(() for _ in range(self.n))
        else:
            self.splits = tuple(tuple(sorted(float(s) for s in sp))
                                for sp in splits)
            if len(self.splits) != self.n:
                raise ValueError("splits must be given per axis")
        for j in range(self.n):
            if self.n_theta[j] < 4 or self.gl_order[j] < 4:
                raise ValueError("node counts must be at least 4")
            if self.grading[j] < 1.0:
                raise ValueError("grading exponent must be at least 1")
            if self.panels[j] < 1 or self.radius[j] <= 0:
                raise ValueError("bad panel count or radius")

    def _per_axis(self, v, typ):
        if np.isscalar(v):
            return tuple(typ(v) for _ in range(self.n))
        v = tuple(typ(x) for x in v)
        if len(v) != self.n:
            raise ValueError("per-axis value has wrong length")
        return v

    def key(self):
        return ("grid", self.n, self.radius, self.n_theta, self.panels,
                self.grading, self.gl_order, self.splits)

    def axis_radial(self, j):
        """Radial nodes and weights (weight includes the polar factor r)."""
        R, P, g = self.radius[j], self.panels[j], self.grading[j]
        brk = [R * (k / P) ** g for k in range(P + 1)]
        brk = sorted(set(brk) | {s for s in self.splits[j] if 0 < s < R})
        x, w = np.polynomial.legendre.leggauss(self.gl_order[j])
        rs, ws = [], []
        for a, b in zip(brk[:-1], brk[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            r = mid + half * x
            rs.append(r)
            ws.append(half * w * r)
        return np.concatenate(rs), np.concatenate(ws)

    def axis_angular(self, j):
        N = self.n_theta[j]
        th = 2.0 * np.pi * np.arange(N) / N
        return th, np.full(N, 2.0 * np.pi / N)

    def coarsened(self, factor=0.6):
        return GridSpec(
            self.n, self.radius,
            tuple(max(4, int(round(t * factor))) for t in self.n_theta),
            self.panels, self.grading,
            tuple(max(4, int(round(q * factor))) for q in self.gl_order),
            self.splits)

    def node_count(self):
        total = 1
        for j in range(self.n):
            r, _ = self.axis_radial(j)
            total *= r.size * self.n_theta[j]
        return total


class QuadratureResult:
    def __init__(self, value, error_estimate, nodes, wall_ms):
        if error_estimate is not None and error_estimate < 0:
            raise ValueError("error estimate must be non-negative")
        self.value = complex(value)
        self.error_estimate = error_estimate
        self.nodes = int(nodes)
        self.wall_ms = float(wall_ms)

    def __repr__(self):
        return (f"QuadratureResult({self.value:.6g}, "
                f"err={self.error_estimate}, nodes={self.nodes})")


def _polydisc_pass(func, grid, chunk):
    rad = [grid.axis_radial(j) for j in range(grid.n)]
    ang = [grid.axis_angular(j) for j in range(grid.n)]
    dims = []
    for j in range(grid.n):
        dims += [rad[j][0].size, ang[j][0].size]
    total = int(np.prod(dims))
    acc = 0.0 + 0.0j
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        multi = np.unravel_index(idx, dims)
        z = np.empty((grid.n, idx.size), dtype=complex)
        w = np.ones(idx.size)
        for j in range(grid.n):
            r = rad[j][0][multi[2 * j]]
            th = ang[j][0][multi[2 * j + 1]]
            z[j] = r * np.exp(1j * th)
            w *= rad[j][1][multi[2 * j]] * ang[j][1][multi[2 * j + 1]]
        acc = acc + np.sum(func(z) * w)
    return acc, total


def integrate_polydisc(func, grid, chunk=1 << 20, with_error=True,
                       coarse_factor=0.6):
    """Integrate a pointwise density over the polydisc with Lebesgue measure.

    func maps a point batch of shape (n, N) to N complex values.  The error
    estimate compares the full grid with a coarsened one (Richardson-style
    two-level difference); pass with_error=False to skip the second pass.
    """
    t0 = time.perf_counter()
    value, nodes = _polydisc_pass(func, grid, chunk)
    err = None
    if with_error:
        coarse, _ = _polydisc_pass(func, grid.coarsened(coarse_factor), chunk)
        err = abs(value - coarse)
    return QuadratureResult(value, err, nodes,
                            1e3 * (time.perf_counter() - t0))


def torus_radii(alpha, beta, eps1, eps2):
    """Radii with |z^alpha|^2 = eps1 and |z^beta|^2 = eps2 (n = 2)."""
    A = np.array([alpha, beta], dtype=float)
    if A.shape != (2, 2) or abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("exponent rows must be linearly independent (n=2)")
    rhs = 0.5 * np.log([eps1, eps2])
    return np.exp(np.linalg.solve(A, rhs))


def integrate_torus_monomial(alpha, beta, eps1, eps2, phi, n_theta=64):
    """Integral of phi / (z^alpha z^beta) over the torus cycle, n = 2.

    The cycle {|z^alpha|^2 = eps1, |z^beta|^2 = eps2} is the torus with
    radii solving the log-linear system; orientation d theta_1 ^ d theta_2.
    phi must have anti-degree 0 (realized bidegree (2, 0)).
    """
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    if phi.n != 2 or phi.q != 0:
        raise ValueError("need a two-variable form of anti-degree 0")
    r = torus_radii(alpha, beta, eps1, eps2)
    if np.any(r >= phi.support_radius):
        warnings.warn("torus cycle lies outside the test form support")
        return 0.0 + 0.0j
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    t1, t2 = np.meshgrid(th, th, indexing="ij")
    z = np.stack([r[0] * np.exp(1j * t1.ravel()),
                  r[1] * np.exp(1j * t2.ravel())])
    c = phi.coefficients(z).get((), 0.0)
    gamma = alpha + beta
    # dz_j = i z_j d theta_j on the torus
    vals = c * (1j * z[0]) * (1j * z[1]) / (z[0] ** gamma[0] * z[1] ** gamma[1])
    return complex(np.sum(vals) * (2.0 * np.pi / n_theta) ** 2)


# residue cycle for f = z1^4, g = z1^2 + z2^2 + z1^3 ------------------------

def pt_default_n_theta(eps2):
    # the phase factor conj(w)/|w| develops features on scale ~ sqrt(eps2)
    return int(min(2048, max(256, 2 ** math.ceil(math.log2(24.0 / math.sqrt(
        math.sqrt(eps2)) + 1)))))


def integrate_pt_cycle(eps1, eps2, bump, n_theta=None):
    """Residue integral of rho rho conj(z2) g dz / (f g) over the cycle.

    Parametrization: z1 = eps1^(1/8) e^{i theta}, z2^2 = w with
    w = sqrt(eps2) e^{i psi} - (z1^2 + z1^3).  Summing both square-root
    branches replaces conj(z2)/z2 by conj(w)/|w|, which is single valued,
    so no branch tracking is needed; the two branches contribute equally.
    Orientation d theta ^ d psi.  Refuses if the cycle passes through a
    branch point (w = 0, i.e. z2 = 0 on the cycle).
    """
    return complex(integrate_pt_cycle_batch(eps1, np.array([eps2]), bump,
                                            n_theta)[0])


def integrate_pt_cycle_batch(eps1, eps2s, bump, n_theta=None):
    """Vectorized residue cycle integral over a batch of eps2 values.

    With n_theta unset the angular resolution is picked per eps2: the
    conj(w)/|w| factor is only sharp when sqrt(eps2) falls inside the range
    of |z1^2 + z1^3| on the circle (the resonant band); away from it the
    integrand is uniformly smooth and a modest rule is spectrally exact.
    """
    eps2s = np.asarray(eps2s, dtype=float)
    if eps1 <= 0 or np.any(eps2s <= 0):
        raise ValueError("regularization parameters must be positive")
    r1 = eps1 ** 0.125
    if r1 >= bump.outer:
        return np.zeros(eps2s.shape, dtype=complex)
    c_lo = r1 * r1 * max(0.0, 1.0 - r1)
    c_hi = r1 * r1 * (1.0 + r1)
    rho1 = bump.value(r1 * r1)

    def one(s2, N):
        th = 2.0 * np.pi * np.arange(N) / N
        e_psi = np.exp(1j * th)
        acc = 0.0 + 0.0j
        # w[(theta, psi)] = sqrt(eps2) e^{i psi} - c(theta); row-chunked to
        # keep the N x N intermediate arrays bounded in memory
        for lo in range(0, N, 512):
            z1 = r1 * e_psi[lo:lo + 512]
            c = z1 ** 2 + z1 ** 3
            w = s2 * e_psi[None, :] - c[:, None]
            aw = np.abs(w)
            if np.min(aw) < 1e-12 * max(s2, float(np.max(np.abs(c)))):
                raise RuntimeError("branch point on the cycle (z2 = 0); "
                                   "perturb eps or the grid")
            dens = (-s2) * e_psi[None, :] * w.conjugate() / aw \
                * bump.value(aw) * (rho1 / z1 ** 3)[:, None]
            acc = acc + np.sum(dens)
        return acc * (2.0 * np.pi / N) ** 2

    out = np.empty(eps2s.shape, dtype=complex)
    for k in range(eps2s.size):
        s2 = math.sqrt(eps2s.flat[k])
        if s2 - c_hi >= bump.t_hi:
            # |z2|^2 = |w| >= sqrt(eps2) - max|c| is past the bump support
            out.flat[k] = 0.0
            continue
        if n_theta is not None:
            out.flat[k] = one(s2, n_theta)
            continue
        # inside the resonant band the conj(w)/|w| factor is sharp on the
        # scale set by eps2; outside it the integrand is uniformly smooth
        # and the trapezoid rule is spectrally exact at modest resolution
        if 0.25 * c_lo <= s2 <= 4.0 * c_hi:
            N = min(4096, 2 * pt_default_n_theta(eps2s.flat[k]))
        else:
            N = 128
        out.flat[k] = one(s2, N)
    return out


def pt_bm_pair_exact_theta2(eps1, eps2, bump, grid3=None, with_error=True):
    """Smoothly regularized pair integral for the quartic/sphere-like data.

    Computes the n = 2 polydisc integral of

        eps1 * eps2 * 8 conj(z1)^3 conj(z2)^2 g(z) rho rho * ORIENT(2)
        / ((|z1|^8 + eps1)^2 (|g|^2 + eps2)^2)

    which is the pairing of dbar(conj f/(|f|^2+eps1)) ^ dbar(conj g/(|g|^2
    +eps2)) with the test form rho rho conj(z2) g dz.  The z2-angular
    integral is done exactly by residue calculus: with v = e^{2 i theta2},
    |g|^2 + eps2 = Q(v)/v for the quadratic Q(v) = conj(c) r2^2 v^2 + D v
    + c r2^2, whose roots come in pairs v- v+ with |v- v+| = 1 and
    D = |c|^2 + r2^4 + eps2 > 2|c| r2^2, so exactly one root lies inside
    the unit circle.  Only a 3-dimensional (r1, theta1, r2) grid remains.
    """
    if grid3 is None:
        grid3 = GridSpec(2, radius=bump.outer, n_theta=(256, 4),
                         panels=(12, 36), grading=(3.0, 1.0), gl_order=8)
    t0 = time.perf_counter()

    def one_pass(g3):
        r1, wr1 = g3.axis_radial(0)
        th1, wt1 = g3.axis_angular(0)
        r2, wr2 = g3.axis_radial(1)
        z1 = r1[:, None] * np.exp(1j * th1[None, :])
        c = z1 ** 2 + z1 ** 3
        rho1 = bump.value((r1 * r1))[:, None] * np.ones_like(th1)[None, :]
        f_den = (r1[:, None] ** 8 + eps1) ** 2
        pre = (8.0 * eps1 * eps2) * z1.conjugate() ** 3 * rho1 / f_den
        acc = 0.0 + 0.0j
        for i2 in range(r2.size):
            R2 = r2[i2]
            rho2 = bump.value(np.array([R2 * R2]))[0]
            if rho2 == 0.0:
                continue
            # theta2 integral of conj(z2)^2 g / (|g|^2+eps2)^2: with
            # v = e^{2 i theta2} the integrand is R2^2 v (c+R2^2 v)/Q(v)^2
            # and d theta2 = dv/(2 i v) traversed twice, so the integral is
            # 2 pi times the residue of P(v)/Q(v)^2 at the inner root,
            # P(v) = R2^2 (c + R2^2 v).
            D = np.abs(c) ** 2 + R2 ** 4 + eps2
            a2 = c.conjugate() * R2 ** 2      # v^2 coefficient of Q
            a0 = c * R2 ** 2                  # constant coefficient
            disc = np.sqrt(D * D - 4.0 * np.abs(a0) ** 2)  # real, positive
            vm = -2.0 * a0 / (D + disc)       # inner root (|vm| < 1), stable
            vp = -(D + disc) / (2.0 * a2)     # outer root
            dv = vm - vp
            P = R2 ** 2 * (c + R2 ** 2 * vm)
            dP = R2 ** 4
            res = dP / (a2 ** 2 * dv ** 2) - 2.0 * P / (a2 ** 2 * dv ** 3)
            ang2 = 2.0 * np.pi * res
            acc = acc + np.sum(pre * ang2 * wr1[:, None] * wt1[None, :]) \
                * wr2[i2] * rho2
        # +4 converts dz ^ dzbar pairing to Lebesgue measure; the extra
        # minus is the Koszul sign from sorting (dzbar1 e)(dzbar2 e') into
        # frame-first order, matching the generic BM_PAIR builder
        return -4.0 * acc

    value = one_pass(grid3)
    err = None
    if with_error:
        err = abs(value - one_pass(grid3.coarsened(0.6)))
    nodes = grid3.axis_radial(0)[0].size * grid3.n_theta[0] \
        * grid3.axis_radial(1)[0].size
    return QuadratureResult(value, err, nodes,
                            1e3 * (time.perf_counter() - t0))


# averaging kernel -----------------------------------------------------------

def _tau_panels(t_max, first=0.25, ratio=2.0, gl=12):
    brk = [0.0, first]
    while brk[-1] < t_max:
        brk.append(min(brk[-1] * ratio if brk[-1] > 0 else first, t_max))
        if brk[-1] == brk[-2]:
            break
    x, w = np.polynomial.legendre.leggauss(gl)
    ts, ws = [], []
    for a, b in zip(brk[:-1], brk[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        ts.append(mid + half * x)
        ws.append(half * w)
    return np.concatenate(ts), np.concatenate(ws)


def fubini_average(eps1, eps2, sampler, t_support, gl=12,
                   mass_tol=1e-6, batch_sampler=None):
    """Average of raw cycle values against the smoothing kernel.

    Computes  integral of eps1*eps2*I(t1,t2) dt1 dt2/((t1+eps1)^2(t2+eps2)^2)
    by substituting t_j = eps_j tau_j, so each axis carries the unit-mass
    kernel d tau/(tau+1)^2.  t_support = (T1, T2) bounds the support of the
    sampler: I must vanish for t_j >= T_j, which makes the truncation of
    the tau integrals exact.  If the kernel mass beyond the truncation
    point is not negligible relative to mass_tol, the caller is told to
    enlarge the support bounds.

    batch_sampler(t1, t2_array) may be supplied to vectorize the inner
    sweep; otherwise sampler(t1, t2) is called pointwise.
    """
    T1, T2 = t_support
    tau1_max = T1 / eps1
    tau2_max = T2 / eps2
    tau1, w1 = _tau_panels(tau1_max, gl=gl)
    tau2, w2 = _tau_panels(tau2_max, gl=gl)
    k1 = w1 / (1.0 + tau1) ** 2
    k2 = w2 / (1.0 + tau2) ** 2
    acc = 0.0 + 0.0j
    t2_vals = eps2 * tau2
    for i in range(tau1.size):
        t1 = eps1 * tau1[i]
        if batch_sampler is not None:
            row = np.asarray(batch_sampler(t1, t2_vals), dtype=complex)
        else:
            row = np.array([sampler(t1, t2) for t2 in t2_vals], dtype=complex)
        acc = acc + k1[i] * np.sum(row * k2)
    # if the sampler has not decayed at the support bound, the dropped
    # kernel tail is not negligible and the bounds must be enlarged
    if sampler is None:
        def sampler(t1, t2):
            return batch_sampler(t1, np.array([t2]))[0]
    bnd = abs(complex(sampler(0.999 * T1, eps2))) \
        + abs(complex(sampler(eps1, 0.999 * T2)))
    tail = 1.0 / (1.0 + tau1_max) + 1.0 / (1.0 + tau2_max)
    if bnd * tail > mass_tol * max(1e-300, abs(acc)):
        raise RuntimeError(
            "kernel mass outside the sampled range is not negligible; "
            "increase t_support")
    return complex(acc)
