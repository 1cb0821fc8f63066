"""Compactly supported test forms with exactly differentiable coefficients.

A TestForm represents

    phi = sum_T c_T(z, conj z) * prod_j B_j(|z_j|^2)  dz_1^...^dz_n ^ dzbar_T

where T runs over sorted subsets of the axes, c_T is a MixedPoly and each
B_j is a radial flat bump profile (or one of its derivatives, or the
constant 1).  Because the bump enters only through |z_j|^2 and its t-
derivatives are available in closed form, dbar of a TestForm is again a
TestForm and no numerical differentiation is ever needed.
"""

import numpy as np

from .algebra import MixedPoly, MultiIndex

BUMP_KINDS = ("one", "rho", "rho_prime", "rho_second")

# kind -> kind of its t-derivative (None marks "not representable")
_BUMP_DERIV = {"one": None, "rho": "rho_prime",
               "rho_prime": "rho_second", "rho_second": None}


def _h(x):
    # exp(-1/x) for x > 0, extended by 0; smooth on the real line
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _h1(x):
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    out[pos] = np.exp(-1.0 / xp) / xp ** 2
    return out


def _h2(x):
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    out[pos] = np.exp(-1.0 / xp) * (1.0 / xp ** 4 - 2.0 / xp ** 3)
    return out


class FlatBump:
    """Radial profile rho(t), t = |zeta|^2: 1 on [0, a^2], 0 from b^2 on.

    Built from the standard exp(-1/x) smoothstep, so rho is identically 1
    near t = 0 and all derivatives are exact.  value/deriv/second are the
    profile and its first two t-derivatives.
    """

    def __init__(self, inner=0.35, outer=0.85):
        if not 0 < inner < outer:
            raise ValueError("need 0 < inner < outer")
        self.inner = float(inner)
        self.outer = float(outer)
        self.t_lo = self.inner ** 2
        self.t_hi = self.outer ** 2
        self._w = self.t_hi - self.t_lo

    def key(self):
        return ("bump", self.inner, self.outer)

    def _x(self, t):
        t = np.asarray(t, dtype=float)
        return (self.t_hi - np.atleast_1d(t)) / self._w, t.ndim == 0

    def value(self, t):
        x, scalar = self._x(t)
        num = _h(x)
        den = num + _h(1.0 - x)
        v = num / den
        return v[0] if scalar else v

    def deriv(self, t):
        x, scalar = self._x(t)
        ha, hb = _h(x), _h(1.0 - x)
        den = ha + hb
        sp = (_h1(x) * hb + ha * _h1(1.0 - x)) / den ** 2
        v = -sp / self._w
        return v[0] if scalar else v

    def second(self, t):
        x, scalar = self._x(t)
        ha, hb = _h(x), _h(1.0 - x)
        h1a, h1b = _h1(x), _h1(1.0 - x)
        den = ha + hb
        num = h1a * hb + ha * h1b
        dnum = _h2(x) * hb - ha * _h2(1.0 - x)
        dden = h1a - h1b
        spp = (dnum * den - 2.0 * num * dden) / den ** 3
        v = spp / self._w ** 2
        return v[0] if scalar else v

    def eval_kind(self, kind, t):
        if kind == "one":
            return np.ones_like(np.asarray(t, dtype=float))
        if kind == "rho":
            return self.value(t)
        if kind == "rho_prime":
            return self.deriv(t)
        if kind == "rho_second":
            return self.second(t)
        raise ValueError(f"unknown bump kind {kind!r}")


class TestForm:
    """Sum of bump-localized polynomial coefficient terms.

    terms is a list of (T, poly, kinds) where T is a sorted tuple of axis
    indices carrying dzbar, poly is a MixedPoly and kinds assigns one of
    BUMP_KINDS to each axis.  All terms share the anti-degree q = |T| and
    a common bump profile.
    """

    def __init__(self, n, q, terms, bump=None):
        self.n = int(n)
        self.q = int(q)
        if not max(0, self.n - 2) <= self.q <= self.n:
            raise ValueError("anti-degree must lie in {n-2, n-1, n}")
        self.bump = bump if bump is not None else FlatBump()
        self.terms = []
        for T, poly, kinds in terms:
            T = tuple(sorted(int(i) for i in T))
            if len(T) != self.q or len(set(T)) != len(T):
                raise ValueError("dzbar subset does not match anti-degree")
            if any(not 0 <= i < self.n for i in T):
                raise ValueError("dzbar axis out of range")
            if poly.n != self.n or len(kinds) != self.n:
                raise ValueError("coefficient data does not match dimension")
            for k in kinds:
                if k not in BUMP_KINDS:
                    raise ValueError(f"unknown bump kind {k!r}")
            if not poly.is_zero():
                self.terms.append((T, poly, tuple(kinds)))

    @classmethod
    def bump_form(cls, n, poly=None, T=None, bump=None, kinds=None):
        """Single-term form; defaults to the full dzbar set and all-rho bumps."""
        poly = poly if poly is not None else MixedPoly.constant(n, 1.0)
        T = tuple(T) if T is not None else tuple(range(n))
        kinds = tuple(kinds) if kinds is not None else ("rho",) * n
        return cls(n, len(T), [(T, poly, kinds)], bump)

    def key(self):
        return ("testform", self.n, self.q, self.bump.key(),
                tuple((T, p.to_text(), kinds) for T, p, kinds
                      in sorted(self.terms, key=lambda t: (t[0], t[2]))))

    @property
    def support_radius(self):
        return self.bump.outer

    def is_zero(self):
        return not self.terms

    # evaluation ------------------------------------------------------------

    def coefficients(self, z):
        """Map T -> coefficient values at z (shape (n, N) accepted)."""
        z = np.asarray(z, dtype=complex)
        t_abs = (z * z.conjugate()).real
        out = {}
        for T, poly, kinds in self.terms:
            v = poly.eval(z)
            for j, kind in enumerate(kinds):
                if kind != "one":
                    v = v * self.bump.eval_kind(kind, t_abs[j])
            out[T] = out.get(T, 0.0) + v
        return out

    def eval_full(self, z):
        """Coefficient of dz ^ dzbar_{1..n}; requires q = n."""
        if self.q != self.n:
            raise ValueError("full coefficient needs a top anti-degree form")
        coeffs = self.coefficients(z)
        full = tuple(range(self.n))
        if full in coeffs:
            return coeffs[full]
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape[1:], dtype=complex)

    # differential ----------------------------------------------------------

    def _dbar_term_axis(self, T, poly, kinds, i):
        """Pieces of dbar_i applied to one term, as new (T', poly', kinds')."""
        if i in T:
            return []
        pos = sum(1 for t in T if t < i)
        # dzbar_i passes the n holomorphic factors, then sorts into T
        sign = (-1) ** (self.n + pos)
        T2 = tuple(sorted(T + (i,)))
        out = []
        dp = poly.diff(i, "antiholo")
        if not dp.is_zero():
            out.append((T2, dp * sign, kinds))
        if kinds[i] != "one":
            dk = _BUMP_DERIV[kinds[i]]
            if dk is None:
                raise ValueError("second bump derivative is not representable")
            zi = MixedPoly.variable(self.n, i)
            kinds2 = kinds[:i] + (dk,) + kinds[i + 1:]
            out.append((T2, (poly * zi) * sign, kinds2))
        return out

    def dbar(self, axes=None):
        """dbar phi (or its dzbar_K part when axes is given), as a TestForm."""
        if self.q >= self.n:
            return TestForm(self.n, self.q, [], self.bump) if self.q == self.n \
                else None
        axes = range(self.n) if axes is None else axes
        new = []
        for T, poly, kinds in self.terms:
            for i in axes:
                new.extend(self._dbar_term_axis(T, poly, kinds, i))
        return TestForm(self.n, self.q + 1, new, self.bump)

    # Taylor projection -----------------------------------------------------

    def taylor_axis(self, j, r):
        """M_j^r: joint Taylor polynomial in (z_j, conj z_j) to degree r.

        Acts exactly on the data: the bump factor on axis j is flat near 0,
        so its Taylor expansion there is the constant 1 (for rho) or 0 (for
        the derivative kinds), and the polynomial part is truncated by the
        total axis-j degree.
        """
        new = []
        for T, poly, kinds in self.terms:
            if kinds[j] in ("rho_prime", "rho_second"):
                continue
            kept = MixedPoly(self.n)
            for (I, J), c in poly.terms.items():
                if I[j] + J[j] <= r:
                    kept.add_term(c, I, J)
            if kept.is_zero():
                continue
            kinds2 = kinds[:j] + ("one",) + kinds[j + 1:]
            new.append((T, kept, kinds2))
        return TestForm(self.n, self.q, new, self.bump)

    def scale(self, c):
        return TestForm(self.n, self.q,
                        [(T, p * c, k) for T, p, k in self.terms], self.bump)

    def __add__(self, other):
        if (self.n, self.q) != (other.n, other.q):
            raise ValueError("cannot add forms of different type")
        if self.bump.key() != other.bump.key():
            raise ValueError("cannot add forms with different bump profiles")
        return TestForm(self.n, self.q, self.terms + other.terms, self.bump)

    def __repr__(self):
        return f"TestForm(n={self.n}, q={self.q}, {len(self.terms)} terms)"


def dbar_testform(phi):
    return phi.dbar()


def dbar_axis(phi, axes):
    """The dzbar_K part of dbar phi for the axis subset K."""
    return phi.dbar(axes=tuple(axes))
