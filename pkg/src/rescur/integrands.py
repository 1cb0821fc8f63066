"""Builders for the regularized current expressions.

Each variant assembles a super-element regularizer pointwise, wedges it
with the antiholomorphic part of the test form, extracts the coefficient
of the full frame times dzbar_1 ^ ... ^ dzbar_n, and multiplies by the
orientation constant that converts dz ^ dzbar top forms into Lebesgue
measure on R^{2n}.  The constant is fixed once by the one-variable
calibration residue_monomial((1), psi) = 2 pi i psi(0).
"""

import numpy as np

from .cutoffs import CutoffSpec, chi_eval, chi_prime
from .superforms import (SuperElement, SectionTuple, minimal_section,
                         dbar_minimal_section)
from .testforms import TestForm

VARIANTS = ("SINGLE_PV", "SINGLE_RES", "PV_PAIR", "POT_RES", "RES_RES",
            "BM_PAIR", "U_NABLA_U", "SEP_INDICATOR")

# dz_1^..^dz_n ^ dzbar_1^..^dzbar_n = ORIENT[n] * (Lebesgue volume)
ORIENT = {1: -2j, 2: 4.0 + 0j, 3: 8j * -1}

# frames contributed by f and by g, and admissible phi anti-degrees
_PAIR_FRAMES = ("RES_RES", "BM_PAIR", "U_NABLA_U")
_NEEDS_G = ("PV_PAIR", "POT_RES", "RES_RES", "BM_PAIR", "U_NABLA_U",
            "SEP_INDICATOR")


class ExprSpec:
    def __init__(self, variant, f, phi, chi1, eps, g=None, chi2=None,
                 weight2=False):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.f = f
        self.g = g
        self.phi = phi
        self.chi1 = chi1
        self.chi2 = chi2
        self.weight2 = bool(weight2)
        eps = tuple(float(e) for e in (eps if np.iterable(eps) else (eps,)))
        if any(e <= 0 for e in eps):
            raise ValueError("regularization parameters must be positive")
        needs_g = variant in _NEEDS_G
        if needs_g:
            if g is None:
                raise ValueError(f"{variant} needs a second section")
            if chi2 is None and variant not in ("U_NABLA_U", "BM_PAIR"):
                raise ValueError(f"{variant} needs a second cutoff")
            if len(eps) != 2:
                raise ValueError(f"{variant} needs (eps1, eps2)")
        else:
            if len(eps) == 1:
                eps = (eps[0], 1.0)
        self.eps = eps
        n = f.n
        if g is not None and g.n != n:
            raise ValueError("sections live in different dimensions")
        if phi.n != n:
            raise ValueError("test form dimension mismatch")
        if chi1 is not None and not chi1.smooth:
            raise ValueError("indicator cutoff only allowed in the chi2 "
                             "slot of SEP_INDICATOR")
        if chi2 is not None and not chi2.smooth \
                and variant != "SEP_INDICATOR":
            raise ValueError("indicator cutoff only allowed in the chi2 "
                             "slot of SEP_INDICATOR")
        if variant in ("PV_PAIR", "POT_RES", "RES_RES", "BM_PAIR",
                       "U_NABLA_U"):
            if f.m != 1 or g.m != 1:
                raise ValueError(f"{variant} is implemented for one-"
                                 "component sections")
        # anti-degree bookkeeping: regularizer + phi must carry n dzbar
        q_ok = {
            "SINGLE_PV": (n - f.m + 1,),
            "SINGLE_RES": (n - f.m,),
            "PV_PAIR": (n,),
            "POT_RES": (n - 1,),
            "RES_RES": (n - 2,),
            "BM_PAIR": (n - 2,),
            "U_NABLA_U": (n, n - 1),
            "SEP_INDICATOR": (n - f.m,),
        }[variant]
        if phi.q not in q_ok:
            raise ValueError(
                f"{variant}: test form anti-degree {phi.q} does not make "
                f"the total antiholomorphic degree n (allowed {q_ok})")
        # cutoff vanishing-order requirements for the full-u variants
        if variant == "SINGLE_PV" and chi1.vanishing_order < f.m:
            raise ValueError("cutoff must vanish to order >= m")
        if variant in ("SINGLE_RES", "SEP_INDICATOR") \
                and chi1.vanishing_order < min(f.m, n) + 1:
            raise ValueError("cutoff must vanish to order >= min(m,n)+1")
        if self.weight2 and variant != "PV_PAIR":
            raise ValueError("the t*chi' weight applies to PV_PAIR only")

    def key(self):
        return ("expr", self.variant, self.f.key(),
                self.g.key() if self.g else None, self.phi.key(),
                self.chi1.key() if self.chi1 else None,
                self.chi2.key() if self.chi2 else None, self.eps,
                self.weight2)


class Integrand:
    """Pointwise Lebesgue density with support and singularity metadata."""

    def __init__(self, n, density, support_radius, singular_axes=(),
                 key=None):
        self.n = n
        self._density = density
        self.support_radius = support_radius
        self.singular_axes = tuple(singular_axes)
        self._key = key

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        one = z.ndim == 1
        if one:
            z = z[:, None]
        v = self._density(z)
        bad = ~np.isfinite(v)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise FloatingPointError(
                f"non-finite density at z = {z[:, i]}")
        return complex(v[0]) if one else v

    __call__ = eval

    def key(self):
        return self._key


def _phi_element(phi, z, m_total):
    el = SuperElement(m_total, phi.n)
    for T, arr in phi.coefficients(z).items():
        mask = sum(1 << (m_total + i) for i in T)
        el.coeffs[mask] = el.coeffs.get(mask, 0.0) + arr
    return el


def _full_mask(m_total, n):
    return ((1 << m_total) - 1) | (((1 << n) - 1) << m_total)


def _safe_div(num, den):
    out = np.zeros_like(num)
    ok = den != 0
    out[ok] = num[ok] / den[ok]
    return out


def _cfl_block(sec, z, m_total, offset):
    """Numerator s ^ (dbar s)^(m-1) of the top Cauchy-Fantappie block."""
    s = minimal_section(sec, z, m_total, offset)
    for _ in range(sec.m - 1):
        s = s.wedge(dbar_minimal_section(sec, z, m_total, offset))
    return s


def _dbar_chi_wedge_u(sec, chi, eps, z, m_total, offset):
    """dbar chi(|f|^2/eps) ^ u^f_{m,m-1} as a super-element.

    For m = 1 the product (sum f_j dbar conj f_j) ^ s / |f|^2 collapses to
    dbar(conj f) ^ e, so the |f|^(-2) singularity cancels exactly and the
    scalar prefactor chi'(t)/eps stays bounded for every smooth family.
    """
    t = sec.norm2(z) / eps
    if sec.m == 1:
        pref = chi_prime(chi, t) / eps
        return dbar_minimal_section(sec, z, m_total, offset).scale(pref)
    vals = sec.values(z)
    dn = SuperElement(m_total, sec.n)
    for i in range(sec.n):
        acc = None
        for j in range(sec.m):
            d = sec._dfull[j][i]
            if d.is_zero():
                continue
            term = vals[j] * d.eval(z).conjugate()
            acc = term if acc is None else acc + term
        if acc is not None:
            dn.coeffs[1 << (m_total + i)] = acc
    num = _cfl_block(sec, z, m_total, offset)
    pref = _safe_div(chi_prime(chi, t) / eps, (eps * t) ** sec.m)
    return dn.wedge(num).scale(pref)


def build(spec):
    """Produce the pointwise density evaluator for an expression."""
    n = spec.f.n
    orient = ORIENT[n]
    eps1, eps2 = spec.eps
    f, g, phi = spec.f, spec.g, spec.phi
    chi1, chi2 = spec.chi1, spec.chi2
    variant = spec.variant

    if variant == "SINGLE_PV":
        m_total = f.m
        mask = _full_mask(m_total, n)

        def density(z):
            nf = f.norm2(z)
            pref = _safe_div(chi_eval(chi1, nf / eps1), nf ** f.m)
            el = _cfl_block(f, z, m_total, 0).scale(pref)
            return orient * el.wedge(_phi_element(phi, z, m_total)).coeff(mask)

    elif variant in ("SINGLE_RES", "SEP_INDICATOR"):
        m_total = f.m
        mask = _full_mask(m_total, n)
        # the frame factor is contracted before the test form is attached,
        # so sorting the m frame generators past the q antiholomorphic
        # differentials of phi costs an extra Koszul sign
        fsign = -1.0 if (f.m % 2 and phi.q % 2) else 1.0

        def density(z):
            R = _dbar_chi_wedge_u(f, chi1, eps1, z, m_total, 0)
            v = orient * fsign \
                * R.wedge(_phi_element(phi, z, m_total)).coeff(mask)
            if variant == "SEP_INDICATOR":
                v = v * chi_eval(chi2, g.norm2(z) / eps2)
            return v

    elif variant == "PV_PAIR":
        mask = _full_mask(0, n)

        def density(z):
            t1 = f.norm2(z) / eps1
            t2 = g.norm2(z) / eps2
            c1 = chi_eval(chi1, t1)
            c2 = t2 * chi_prime(chi2, t2) if spec.weight2 \
                else chi_eval(chi2, t2)
            fg = f.values(z)[0] * g.values(z)[0]
            return orient * c1 * c2 * _safe_div(phi.eval_full(z), fg)

    elif variant == "POT_RES":
        mask = _full_mask(0, n)

        def density(z):
            t1 = f.norm2(z) / eps1
            t2 = g.norm2(z) / eps2
            gv = g.values(z)[0]
            # dbar chi2(|g|^2/eps2) = chi2'(t2)/eps2 * g dbar conj g
            dg = SuperElement(0, n)
            for i in range(n):
                d = g._dfull[0][i]
                if d.is_zero():
                    continue
                dg.coeffs[1 << i] = gv * d.eval(z).conjugate()
            dg = dg.scale(chi_prime(chi2, t2) / eps2)
            num = dg.wedge(_phi_element(phi, z, 0)).coeff(mask)
            fg = f.values(z)[0] * gv
            return orient * chi_eval(chi1, t1) * _safe_div(num, fg)

    elif variant in ("RES_RES", "BM_PAIR"):
        m_total = 2
        mask = _full_mask(m_total, n)

        def density(z):
            if variant == "RES_RES":
                Rf = _dbar_chi_wedge_u(f, chi1, eps1, z, m_total, 0)
                Rg = _dbar_chi_wedge_u(g, chi2, eps2, z, m_total, 1)
            else:
                # dbar(conj f/(|f|^2+eps)) = eps dbar conj f/(|f|^2+eps)^2
                Rf = dbar_minimal_section(f, z, m_total, 0).scale(
                    eps1 / (f.norm2(z) + eps1) ** 2)
                Rg = dbar_minimal_section(g, z, m_total, 1).scale(
                    eps2 / (g.norm2(z) + eps2) ** 2)
            el = Rf.wedge(Rg).wedge(_phi_element(phi, z, m_total))
            return orient * el.coeff(mask)

    elif variant == "U_NABLA_U":
        m_total = 2
        mask_full = _full_mask(m_total, n)
        mask_e = 1 | (((1 << n) - 1) << m_total)

        def density(z):
            uf = minimal_section(f, z, m_total, 0).scale(
                1.0 / (f.norm2(z) + eps1))
            ng2 = g.norm2(z)
            nabla = SuperElement.scalar(m_total, n, 1.0 - eps2 / (ng2 + eps2))
            nabla = nabla + dbar_minimal_section(g, z, m_total, 1).scale(
                -eps2 / (ng2 + eps2) ** 2)
            el = uf.wedge(nabla).wedge(_phi_element(phi, z, m_total))
            # by degree count exactly one of the two frame contents matches
            return orient * (el.coeff(mask_full) + el.coeff(mask_e))

    else:  # pragma: no cover
        raise AssertionError(variant)

    axes = sorted({j for p in f.components for (I, _) in p.terms
                   for j in range(n) if I[j] > 0})
    return Integrand(n, density, phi.support_radius, axes, key=spec.key())
