"""Smooth cutoff families on [0, infinity].

Three families are supported:

* canonical_pow:   chi_l(t) = t^l / (t+1)^l, vanishing to order exactly l
                   at 0 with chi(inf) = 1;
* complement_pow:  1 / (t+1)^l, equal to 1 at 0 and 0 at infinity (only
                   meaningful inside the u/nabla-u style integrands);
* indicator:       characteristic function of [1, inf] (only accepted by
                   the integrand variants that explicitly allow it).

Derivatives of the analytic families are exact, so the most singular
factors of the integrands never see numerical differentiation.
"""

import math

import numpy as np
from scipy import integrate as _sci_integrate

FAMILIES = ("canonical_pow", "complement_pow", "indicator")


class CutoffSpec:
    def __init__(self, family="canonical_pow", order=1):
        if family not in FAMILIES:
            raise ValueError(f"unknown cutoff family {family!r}")
        order = int(order)
        if order < 1:
            raise ValueError("order must be a positive integer")
        self.family = family
        self.order = order

    @property
    def value_at_inf(self):
        return 0.0 if self.family == "complement_pow" else 1.0

    @property
    def vanishing_order(self):
        """Order of vanishing at t = 0 (complement family does not vanish)."""
        return 0 if self.family == "complement_pow" else self.order

    @property
    def smooth(self):
        return self.family != "indicator"

    def key(self):
        return ("chi", self.family, self.order)

    def __repr__(self):
        return f"CutoffSpec({self.family}, order={self.order})"


def chi_eval(spec, t):
    """Evaluate the family at t >= 0; t may be an array and may be inf."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("cutoff argument must be non-negative")
    l = spec.order
    if spec.family == "indicator":
        return np.where(t >= 1.0, 1.0, 0.0)
    with np.errstate(invalid="ignore"):
        if spec.family == "canonical_pow":
            # t^l/(t+1)^l written as (t/(t+1))^l; at t=inf the ratio is nan
            r = np.where(np.isinf(t), 1.0, t / (t + 1.0))
        else:
            r = np.where(np.isinf(t), 0.0, 1.0 / (t + 1.0))
    return r ** l


def chi_prime(spec, t):
    """Exact derivative of a smooth family."""
    if not spec.smooth:
        raise ValueError("indicator family has no pointwise derivative")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("cutoff argument must be non-negative")
    l = spec.order
    with np.errstate(invalid="ignore"):
        if spec.family == "canonical_pow":
            # d/dt (t/(t+1))^l = l t^(l-1) / (t+1)^(l+1)
            v = l * t ** (l - 1) / (t + 1.0) ** (l + 1)
        else:
            v = -l / (t + 1.0) ** (l + 1)
    return np.where(np.isinf(t), 0.0, v)


def delta_family_pairing(spec, phi1d, eps):
    """Compute integral of (d/dt) chi(t/eps) * phi(t) over [0, inf).

    After the substitution tau = t/eps this is the pairing of chi' with
    tau -> phi(eps*tau); it converges to phi(0) as eps -> 0.
    """
    if not spec.smooth:
        raise ValueError("indicator family has no pointwise derivative")
    if eps <= 0:
        raise ValueError("eps must be positive")

    def integrand(tau):
        return chi_prime(spec, tau) * phi1d(eps * tau)

    val, err = _sci_integrate.quad(integrand, 0.0, np.inf, limit=200)
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise RuntimeError(
            f"cutoff pairing quadrature did not converge (err={err:.2e})")
    return val
