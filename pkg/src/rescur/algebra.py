"""Multiindices and sparse mixed polynomials in z and conj(z).

A MixedPoly stores terms c * z^I * conj(z)^J keyed by the exponent pair
(I, J).  All coefficient algebra (sums, products, formal derivatives,
conjugation) is exact; evaluation is plain complex arithmetic and accepts
vectorized point arrays.
"""

import math

import numpy as np


class MultiIndex(tuple):
    """Tuple of non-negative integer exponents."""

    def __new__(cls, entries):
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError("multiindex entries must be non-negative")
        return super().__new__(cls, entries)

    @property
    def n(self):
        return len(self)

    def support(self):
        return tuple(j for j, e in enumerate(self) if e > 0)

    def degree(self):
        return sum(self)

    def __add__(self, other):
        return MultiIndex(a + b for a, b in zip(self, other, strict=True))

    def scale(self, k):
        return MultiIndex(k * a for a in self)


def mi_norms(alpha):
    """Return (euclidean length, cardinality of the support) of alpha."""
    alpha = MultiIndex(alpha)
    euclid = math.sqrt(sum(a * a for a in alpha))
    return euclid, len(alpha.support())


class MixedPoly:
    """Sparse polynomial in z_1..z_n and their conjugates.

    terms maps (I, J) -> complex coefficient, I the z-powers and J the
    conj(z)-powers.  Zero coefficients are never stored, so equality of
    term dicts is equality of polynomials.
    """

    def __init__(self, n, terms=None):
        self.n = int(n)
        self.terms = {}
        if terms:
            for (I, J), c in terms.items():
                self.add_term(c, I, J)

    def add_term(self, coeff, I, J=None):
        I = MultiIndex(I)
        J = MultiIndex(J) if J is not None else MultiIndex((0,) * self.n)
        if I.n != self.n or J.n != self.n:
            raise ValueError("exponent length does not match dimension")
        coeff = complex(coeff)
        if coeff == 0:
            return
        key = (I, J)
        c = self.terms.get(key, 0j) + coeff
        if c == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, n, c):
        p = cls(n)
        p.add_term(c, (0,) * n)
        return p

    @classmethod
    def monomial(cls, n, I, coeff=1.0, J=None):
        p = cls(n)
        p.add_term(coeff, I, J)
        return p

    @classmethod
    def variable(cls, n, j):
        I = [0] * n
        I[j] = 1
        return cls.monomial(n, I)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        out = MixedPoly(self.n)
        for (I, J), c in self.terms.items():
            out.add_term(c, I, J)
        for (I, J), c in other.terms.items():
            out.add_term(c, I, J)
        return out

    def __sub__(self, other):
        return self + (self._coerce(other) * -1)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            out = MixedPoly(self.n)
            for (I, J), c in self.terms.items():
                out.add_term(c * other, I, J)
            return out
        out = MixedPoly(self.n)
        for (I1, J1), c1 in self.terms.items():
            for (I2, J2), c2 in other.terms.items():
                out.add_term(c1 * c2, I1 + I2, J1 + J2)
        return out

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, (int, float, complex)):
            return MixedPoly.constant(self.n, other)
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return other

    def conj(self):
        out = MixedPoly(self.n)
        for (I, J), c in self.terms.items():
            out.add_term(c.conjugate(), J, I)
        return out

    def diff(self, j, kind="holo"):
        """Formal partial derivative d/dz_j (holo) or d/dconj(z_j) (antiholo)."""
        if kind not in ("holo", "antiholo"):
            raise ValueError("kind must be 'holo' or 'antiholo'")
        out = MixedPoly(self.n)
        for (I, J), c in self.terms.items():
            E = I if kind == "holo" else J
            if E[j] == 0:
                continue
            E2 = list(E)
            E2[j] -= 1
            if kind == "holo":
                out.add_term(c * E[j], E2, J)
            else:
                out.add_term(c * E[j], I, E2)
        return out

    def is_holomorphic(self):
        return all(J.degree() == 0 for (_, J) in self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, MixedPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def sorted_terms(self):
        """Terms in canonical (I, J) order, for deterministic iteration."""
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def max_degree(self, j):
        """Largest I_j + J_j over the stored terms (0 for the zero poly)."""
        return max((I[j] + J[j] for (I, J) in self.terms), default=0)

    # -- evaluation --------------------------------------------------------

    def eval(self, z):
        """Evaluate at z, an array of shape (n,) or (n, N)."""
        z = np.asarray(z, dtype=complex)
        if z.shape[0] != self.n:
            raise ValueError("point dimension does not match polynomial")
        zc = z.conjugate()
        acc = np.zeros(z.shape[1:], dtype=complex)
        for (I, J), c in self.sorted_terms():
            t = np.full(z.shape[1:], c, dtype=complex)
            for j in range(self.n):
                if I[j]:
                    t = t * z[j] ** I[j]
                if J[j]:
                    t = t * zc[j] ** J[j]
            acc = acc + t
        return acc

    def __call__(self, z):
        return self.eval(z)

    # -- serialization -----------------------------------------------------

    def to_text(self):
        """One term per line: coeff_re coeff_im I1..In J1..Jn."""
        lines = []
        for (I, J), c in self.sorted_terms():
            nums = [repr(c.real), repr(c.imag)]
            nums += [str(e) for e in I] + [str(e) for e in J]
            lines.append(" ".join(nums))
        return "\n".join(lines)

    @classmethod
    def from_text(cls, n, text):
        p = cls(n)
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 + 2 * n:
                raise ValueError("bad term line: %r" % line)
            c = float(parts[0]) + 1j * float(parts[1])
            I = [int(x) for x in parts[2:2 + n]]
            J = [int(x) for x in parts[2 + n:]]
            p.add_term(c, I, J)
        return p

    def __repr__(self):
        if not self.terms:
            return "MixedPoly(0)"
        bits = []
        for (I, J), c in self.sorted_terms():
            s = format(c, ".3g")
            for j in range(self.n):
                if I[j]:
                    s += f"*z{j + 1}^{I[j]}" if I[j] > 1 else f"*z{j + 1}"
                if J[j]:
                    s += f"*~z{j + 1}^{J[j]}" if J[j] > 1 else f"*~z{j + 1}"
            bits.append(s)
        return "MixedPoly(" + " + ".join(bits) + ")"


def poly_eval(p, z):
    return p.eval(z)


def poly_diff(p, j, kind="holo"):
    return p.diff(j, kind)
