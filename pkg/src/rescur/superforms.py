"""Pointwise exterior algebra over frame generators and dz-bar differentials.

Generators are ordered e_1 < ... < e_m < dzbar_1 < ... < dzbar_n and all of
them are odd.  A SuperElement stores coefficients with respect to the
canonically sorted wedge basis, keyed by a bitmask (low bits = frames,
high bits = antiholomorphic differentials).  Coefficients may be complex
scalars or numpy arrays over a batch of points, so the same algebra serves
single-point checks and vectorized quadrature.
"""

import numpy as np

from .algebra import MixedPoly


class SuperElement:
    """Element of the exterior algebra over m frame and n dz-bar generators."""

    def __init__(self, m, n, coeffs=None):
        self.m = int(m)
        self.n = int(n)
        self.coeffs = dict(coeffs) if coeffs else {}

    # masks ---------------------------------------------------------------

    def frame_mask(self, j):
        return 1 << j

    def dzbar_mask(self, i):
        return 1 << (self.m + i)

    @staticmethod
    def _wedge_sign(a, b):
        """Koszul sign for sorting basis(a) ^ basis(b) into canonical order."""
        inv = 0
        bb = b
        while bb:
            i = (bb & -bb).bit_length() - 1
            inv += (a >> (i + 1)).bit_count()
            bb &= bb - 1
        return -1 if inv & 1 else 1

    # construction helpers -------------------------------------------------

    @classmethod
    def scalar(cls, m, n, c):
        return cls(m, n, {0: c})

    @classmethod
    def generator(cls, m, n, mask, c=1.0):
        return cls(m, n, {mask: c})

    def copy(self):
        return SuperElement(self.m, self.n, self.coeffs)

    # algebra ---------------------------------------------------------------

    def _check(self, other):
        if self.m != other.m or self.n != other.n:
            raise ValueError("generator sets do not match")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return SuperElement(self.m, self.n, out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return SuperElement(self.m, self.n,
                            {k: v * c for k, v in self.coeffs.items()})

    def wedge(self, other):
        self._check(other)
        out = {}
        for ka, ca in self.coeffs.items():
            for kb, cb in other.coeffs.items():
                if ka & kb:
                    continue
                s = self._wedge_sign(ka, kb)
                k = ka | kb
                term = ca * cb if s > 0 else -(ca * cb)
                out[k] = out[k] + term if k in out else term
        return SuperElement(self.m, self.n, out)

    def coeff(self, mask):
        return self.coeffs.get(mask, 0.0)

    def degrees(self, mask):
        frame = (mask & ((1 << self.m) - 1)).bit_count()
        anti = (mask >> self.m).bit_count()
        return frame, anti

    def max_abs(self):
        return max((np.max(np.abs(c)) for c in self.coeffs.values()),
                   default=0.0)

    def __repr__(self):
        return f"SuperElement(m={self.m}, n={self.n}, {len(self.coeffs)} terms)"


def wedge(a, b):
    return a.wedge(b)


def interior_delta(f_values, a, offset=0):
    """Interior multiplication by f on the frame range [offset, offset+m_f).

    Antiderivation with delta(e_{offset+j}) = f_values[j] and delta = 0 on
    the dz-bar generators.
    """
    out = {}
    mf = len(f_values)
    for mask, c in a.coeffs.items():
        for j in range(mf):
            bit = 1 << (offset + j)
            if not mask & bit:
                continue
            below = (mask & (bit - 1)).bit_count()
            term = c * f_values[j]
            if below & 1:
                term = -term
            k = mask & ~bit
            out[k] = out[k] + term if k in out else term
    return SuperElement(a.m, a.n, out)


class SectionTuple:
    """Tuple of m holomorphic polynomials, optionally times a shared unit.

    The unit factor must be non-vanishing on the working polydisc; this is
    checked by sampling when the tuple is constructed.
    """

    def __init__(self, components, n=None, unit_factor=None,
                 domain_radius=1.0, unit_floor=1e-3):
        if not components:
            raise ValueError("need at least one component")
        self.components = list(components)
        self.n = n if n is not None else self.components[0].n
        self.m = len(self.components)
        if self.m > 2 or self.n > 3:
            raise ValueError("supported sizes are m <= 2, n <= 3")
        for p in self.components:
            if p.n != self.n:
                raise ValueError("component dimension mismatch")
            if not p.is_holomorphic():
                raise ValueError("components must be holomorphic")
        self.unit_factor = unit_factor
        if unit_factor is not None:
            if not unit_factor.is_holomorphic():
                raise ValueError("unit factor must be holomorphic")
            lo = self._min_unit_modulus(domain_radius)
            if lo <= unit_floor:
                raise ValueError(
                    f"unit factor modulus {lo:.3g} below floor on the domain")
        # full components (base * unit) and their conjugated z-derivatives
        if unit_factor is None:
            self._full = self.components
        else:
            self._full = [p * unit_factor for p in self.components]
        self._dfull = [[p.diff(i, "holo") for i in range(self.n)]
                       for p in self._full]

    def _min_unit_modulus(self, radius, samples=9):
        axes = [np.linspace(-radius, radius, samples)] * (2 * self.n)
        grids = np.meshgrid(*axes, indexing="ij")
        z = np.stack([grids[2 * j].ravel() + 1j * grids[2 * j + 1].ravel()
                      for j in range(self.n)])
        return float(np.min(np.abs(self.unit_factor.eval(z))))

    def key(self):
        unit = self.unit_factor.to_text() if self.unit_factor else ""
        return ("section", self.n, tuple(p.to_text() for p in self.components),
                unit)

    # pointwise data -------------------------------------------------------

    def values(self, z):
        """Component values f_j(z); shape (m,) + point batch shape."""
        return [p.eval(z) for p in self._full]

    def norm2(self, z):
        vals = self.values(z)
        return sum((v * v.conjugate()).real for v in vals)


def minimal_section(f, z, m_total=None, offset=0):
    """s_f = sum_j conj(f_j(z)) e_j, the minimal solution of delta_f s = |f|^2."""
    m_total = m_total if m_total is not None else f.m
    vals = f.values(z)
    coeffs = {1 << (offset + j): vals[j].conjugate() for j in range(f.m)}
    return SuperElement(m_total, f.n, coeffs)


def dbar_minimal_section(f, z, m_total=None, offset=0):
    """dbar s_f = sum_{j,i} conj(df_j/dz_i (z)) dzbar_i wedge e_j."""
    m_total = m_total if m_total is not None else f.m
    out = SuperElement(m_total, f.n)
    for j in range(f.m):
        for i in range(f.n):
            d = f._dfull[j][i]
            if d.is_zero():
                continue
            c = d.eval(z).conjugate()
            dzb = SuperElement.generator(m_total, f.n, 1 << (m_total + i), c)
            ej = SuperElement.generator(m_total, f.n, 1 << (offset + j), 1.0)
            out = out + dzb.wedge(ej)
    return out


def cfl_term(f, k, z, m_total=None, offset=0, norm2_shift=0.0):
    """u^f_{k,k-1} = s_f wedge (dbar s_f)^(k-1) / (|f|^2 + shift)^k.

    With shift = 0 this is the Cauchy-Fantappie-Leray block away from the
    zero set; with shift = eps it is the regularized block
    s wedge (dbar s)^(k-1) / (|f|^2 + eps)^k.
    """
    if not 1 <= k <= f.m:
        raise ValueError("k must satisfy 1 <= k <= m")
    den = f.norm2(z) + norm2_shift
    if norm2_shift == 0.0 and np.any(den == 0):
        raise ValueError("evaluation at a zero of the section tuple")
    s = minimal_section(f, z, m_total, offset)
    num = s
    if k > 1:
        ds = dbar_minimal_section(f, z, m_total, offset)
        for _ in range(k - 1):
            num = num.wedge(ds)
    return num.scale(1.0 / den ** k)
