"""Ground-truth values for monomial currents and the growth-estimate integrals.

pv_monomial computes the principal value of a test form against 1/zeta^alpha
by Taylor subtraction: the subtracted terms integrate to exactly zero over
any polydisc by angular orthogonality, while the remainder is absolutely
integrable, so plain graded quadrature reaches near machine precision.
residue_monomial is defined through the Stokes transfer residue = -pv(dbar
phi), which is also the identity used to calibrate the global orientation
constant: residue_monomial((1,), psi dz) = 2 pi i psi(0).
"""

import itertools
import math

import numpy as np

from .algebra import MultiIndex
from .integrands import ORIENT
from .quadrature import GridSpec, integrate_polydisc
from .testforms import TestForm, dbar_axis


def _taylor_subtracted(phi, alpha):
    """phi - M^r_K phi with K = {j: alpha_j >= 2}, r_j = alpha_j - 2."""
    K = [j for j in range(phi.n) if alpha[j] >= 2]
    total = phi
    for size in range(1, len(K) + 1):
        for L in itertools.combinations(K, size):
            part = phi
            for j in L:
                part = part.taylor_axis(j, alpha[j] - 2)
            total = total + part.scale((-1.0) ** size)
    return total


def _pv_grid(phi, alpha):
    deg = max(max(p.max_degree(j) for j in range(phi.n))
              for _, p, _ in phi.terms) if phi.terms else 0
    n_theta = max(16, 2 * (deg + max(alpha) + 2))
    return GridSpec(phi.n, radius=phi.support_radius, n_theta=n_theta,
                    panels=24, grading=3.0, gl_order=12)


def pv_monomial(alpha, phi, grid=None, tol=1e-4):
    """[1/zeta^alpha].phi for a test form of full anti-degree."""
    alpha = MultiIndex(alpha)
    if alpha.n != phi.n or phi.q != phi.n:
        raise ValueError("need a full anti-degree form matching alpha")
    diff = _taylor_subtracted(phi, alpha)
    if diff.is_zero():
        return 0.0 + 0.0j
    grid = grid if grid is not None else _pv_grid(phi, alpha)
    orient = ORIENT[phi.n]

    def density(z):
        den = np.ones(z.shape[1:], dtype=complex)
        for j in range(phi.n):
            if alpha[j]:
                den = den * z[j] ** alpha[j]
        return orient * diff.eval_full(z) / den

    res = integrate_polydisc(density, grid)
    if res.error_estimate > tol * max(1.0, abs(res.value)):
        raise RuntimeError(
            f"pv quadrature did not converge (err={res.error_estimate:.2e})")
    return res.value


def residue_monomial(alpha, phi, grid=None):
    """dbar[1/zeta^alpha].phi via the Stokes transfer -pv(alpha, dbar phi)."""
    alpha = MultiIndex(alpha)
    if phi.q != phi.n - 1:
        raise ValueError("need a form of anti-degree n-1")
    return -pv_monomial(alpha, phi.dbar(), grid)


def palle_rhs(k, l, alpha1, alpha2, beta1, beta2, phi):
    """Tensor value [1/(mu^k zeta^{l beta''})] (x) dbar[1/zeta^{l beta'}].phi.

    mu = zeta^{alpha' + alpha''}; the residue factor acts in the beta'
    variables (Stokes transfer there) and the principal value in the rest,
    which for monomials collapses to a single pv of the combined exponent
    of the dbar_K part of phi, K = supp(beta').
    """
    a1, a2 = MultiIndex(alpha1), MultiIndex(alpha2)
    b1, b2 = MultiIndex(beta1), MultiIndex(beta2)
    if any((x == 0) != (y == 0) for x, y in zip(a2, b2)):
        raise ValueError("alpha'' and beta'' must share their support")
    if set(a1.support()) & set(b1.support()):
        raise ValueError("alpha' and beta' supports must be disjoint")
    if l == 0:
        # the dbar factor is the zero current
        return 0.0 + 0.0j
    K = b1.support()
    if not K:
        return 0.0 + 0.0j
    gamma = (a1 + a2).scale(k) + (b1 + b2).scale(l)
    return -pv_monomial(gamma, dbar_axis(phi, K))


# growth-estimate integrals --------------------------------------------------

ESTIMATE_KINDS = ("lemma54_single", "lemma54_pair", "lemma55_single",
                  "lemma55_pair", "lemma55_cross")


def _axis_bounds(constraints, r_prefix, j, n):
    """Interval of r_j in [0,1] allowed by all constraints, given the
    other radii; also the product power each constraint contributes."""
    lo, hi = 0.0, 1.0
    for gamma, eps, ge in constraints:
        rest = eps
        for i in range(n):
            if i != j and gamma[i]:
                rest = rest / r_prefix[i] ** (2 * gamma[i])
        if gamma[j] == 0:
            sat = rest <= 1.0  # prod r^{2 gamma} >= eps already decided
            if ge and not sat:
                return 1.0, 0.0
            if not ge and sat:
                return 1.0, 0.0
            continue
        bound = rest ** (1.0 / (2 * gamma[j])) if rest > 0 else 0.0
        if ge:
            lo = max(lo, min(bound, 1.0))
        else:
            hi = min(hi, min(bound, 1.0))
    return lo, hi


def _power_integral(p, lo, hi):
    """Integral of r^p over [lo, hi] (p may be a negative even integer)."""
    if hi <= lo:
        return 0.0
    if p == -1:
        return math.log(hi / lo) if lo > 0 else math.inf
    q = p + 1
    return (hi ** q - (lo ** q if lo > 0 or q > 0 else math.inf)) / q


def estimate_lhs(kind, alpha, eps1, beta=None, eps2=None, panels=400):
    """Left-hand integrals of the growth estimates over the unit polydisc.

    Regions are cut by indicator constraints on |zeta^alpha|^2 (and
    |zeta^beta|^2 for the pair/cross kinds); the integrand carries
    prod 1/|zeta_j| and an eps/|zeta^gamma|^2 factor per >= constraint of
    a lemma-55 flavor.  Normalization: the polar reduction gives a factor
    (4 pi)^n, i.e. twice Lebesgue per real dimension pair.
    """
    if kind not in ESTIMATE_KINDS:
        raise ValueError(f"unknown estimate kind {kind!r}")
    alpha = MultiIndex(alpha)
    n = alpha.n
    if n > 2:
        raise ValueError("estimates are implemented for n <= 2")
    constraints = []   # (gamma, eps, is_ge)
    powers = [0] * n   # extra r-powers from the eps/|zeta^gamma|^2 factors
    scale = 1.0
    if kind == "lemma54_single":
        constraints.append((alpha, eps1, False))
    elif kind == "lemma55_single":
        constraints.append((alpha, eps1, True))
        powers = [-2 * a for a in alpha]
        scale = eps1
    else:
        beta = MultiIndex(beta)
        if beta.n != n or eps2 is None:
            raise ValueError("pair/cross kinds need beta and eps2")
        if kind == "lemma54_pair":
            constraints += [(alpha, eps1, False), (beta, eps2, False)]
        elif kind == "lemma55_pair":
            constraints += [(alpha, eps1, True), (beta, eps2, True)]
            powers = [-2 * (a + b) for a, b in zip(alpha, beta)]
            scale = eps1 * eps2
        else:  # lemma55_cross
            constraints += [(alpha, eps1, True), (beta, eps2, False)]
            powers = [-2 * a for a in alpha]
            scale = eps1

    if n == 1:
        lo, hi = _axis_bounds(constraints, [None], 0, 1)
        val = _power_integral(powers[0], lo, hi)
        return (4.0 * math.pi) * scale * val

    # n = 2: panelled outer integral in r_1, exact inner power integral
    crit = {0.0, 1.0}
    for gamma, eps, _ in constraints:
        if gamma[0]:
            crit.add(min(1.0, eps ** (1.0 / (2 * gamma[0]))))
    brk = sorted(crit)
    x, w = np.polynomial.legendre.leggauss(24)
    total = 0.0
    for a, b in zip(brk[:-1], brk[1:]):
        # grade panels toward the lower break to resolve power behavior
        sub = a + (b - a) * (np.arange(panels + 1) / panels) ** 3
        for sa, sb in zip(sub[:-1], sub[1:]):
            mid, half = 0.5 * (sa + sb), 0.5 * (sb - sa)
            r1 = mid + half * x
            inner = np.empty_like(r1)
            for i, r in enumerate(r1):
                lo, hi = _axis_bounds(constraints, [r, None], 1, 2)
                inner[i] = _power_integral(powers[1], lo, hi)
            total += half * np.sum(w * r1 ** powers[0] * inner)
    return (4.0 * math.pi) ** 2 * scale * total
