"""Riemann-sphere arithmetic: points, polynomials, rational maps.

Everything here treats the sphere as the complex plane plus one point at
infinity.  The chordal metric and the spherical derivative norm are the
two quantities the rest of the library is built on; both are evaluated
through the 1/z chart whenever moduli get large, so no intermediate blows
up and the two charts agree to near machine precision on their overlap.

Conventions:
  - polynomial coefficients are stored ascending (coeffs[k] multiplies z^k)
  - any modulus above BIG_MODULUS is reclassified as the point at infinity
  - root multiplicity shows up as repeated list entries, never collapsed
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence

BIG_MODULUS = 1e150

# residual acceptance factor for the root solver
_ROOT_RESID = 1e-8
_ABERTH_MAX_ITER = 500


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere: a finite complex value or infinity.

    Construct through SpherePoint.of(), which routes overflow and non-finite
    floats to the infinity representative so NaN never enters the data.
    """

    z: complex | None  # None encodes the point at infinity

    @staticmethod
    def of(value) -> "SpherePoint":
        if isinstance(value, SpherePoint):
            return value
        if value is None:
            return INF
        z = complex(value)
        if (
            math.isfinite(z.real)
            and math.isfinite(z.imag)
            and abs(z.real) <= BIG_MODULUS
            and abs(z.imag) <= BIG_MODULUS
        ):
            return SpherePoint(z)
        return INF

    @property
    def is_infinite(self) -> bool:
        return self.z is None

    @property
    def value(self) -> complex:
        if self.z is None:
            raise ValueError("point at infinity has no finite value")
        return self.z

    def sort_key(self):
        if self.z is None:
            return (1, 0.0, 0.0)
        return (0, self.z.real, self.z.imag)

    def __repr__(self):
        return "INF" if self.z is None else f"SpherePoint({self.z!r})"


INF = SpherePoint(None)


def chordal_distance(a, b) -> float:
    """Chordal metric on the sphere; range [0, 2], with 2 for antipodes."""
    a = SpherePoint.of(a)
    b = SpherePoint.of(b)
    if a.is_infinite and b.is_infinite:
        return 0.0
    if a.is_infinite or b.is_infinite:
        w = b if a.is_infinite else a
        return 2.0 / math.hypot(1.0, abs(w.value))
    za, zb = a.value, b.value
    num = 2.0 * abs(za - zb)
    return num / (math.hypot(1.0, abs(za)) * math.hypot(1.0, abs(zb)))


def chordal_distance_many(z1, inf1, z2, inf2):
    """Vectorized chordal distance for parallel arrays with infinity masks."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    s1 = np.hypot(1.0, np.abs(z1))
    s2 = np.hypot(1.0, np.abs(z2))
    d = 2.0 * np.abs(z1 - z2) / (s1 * s2)
    if np.any(inf1) or np.any(inf2):
        d = np.where(inf1 & inf2, 0.0, d)
        d = np.where(inf1 & ~inf2, 2.0 / s2, d)
        d = np.where(~inf1 & inf2, 2.0 / s1, d)
    return d


def sphere_embed(z, inf):
    """Map plane points to R^3 on the unit sphere; chordal distance equals
    Euclidean distance there, which is what the KD-tree queries rely on."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    denom = 1.0 + r2
    out = np.empty(z.shape + (3,))
    out[..., 0] = 2.0 * z.real / denom
    out[..., 1] = 2.0 * z.imag / denom
    out[..., 2] = (r2 - 1.0) / denom
    if np.any(inf):
        out[inf] = (0.0, 0.0, 1.0)
    return out


# ---------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Dense polynomial with ascending complex coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("coefficients must be finite")
        # strip trailing (high-order) exact zeros, keep at least one entry
        n = c.size
        while n > 1 and c[n - 1] == 0:
            n -= 1
        self.coeffs = c[:n]
        self.coeffs.flags.writeable = False

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def __call__(self, z):
        return horner(self.coeffs, z)

    def deriv(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        k = np.arange(1, self.coeffs.size)
        return Polynomial(self.coeffs[1:] * k)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        out = np.zeros(n, dtype=complex)
        out[: a.size] += a
        out[: b.size] += b
        return Polynomial(out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(
            self.coeffs, other.coeffs
        )

    def __hash__(self):
        return hash(tuple(self.coeffs.tolist()))

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()!r})"


def horner(coeffs, z):
    """Evaluate ascending-coefficient polynomial(s); works on scalars and arrays."""
    c = np.asarray(coeffs, dtype=complex)
    acc = np.full_like(np.asarray(z, dtype=complex), c[-1])
    for k in range(c.size - 2, -1, -1):
        acc = acc * z + c[k]
    if np.ndim(z) == 0:
        return complex(acc)
    return acc


def _horner_rows(C, Z):
    """Row-wise Horner: C is (m, n+1) ascending coefficients, Z is (m, r)."""
    acc = np.broadcast_to(C[:, -1:], Z.shape).copy()
    for k in range(C.shape[1] - 2, -1, -1):
        acc *= Z
        acc += C[:, k : k + 1]
    return acc


def _pad(coeffs, length):
    out = np.zeros(length, dtype=complex)
    out[: coeffs.size] = coeffs
    return out


def _reversed_padded(coeffs, deg):
    """Coefficients of w^deg * p(1/w) as an ascending array of length deg+1."""
    return _pad(coeffs, deg + 1)[::-1].copy()


# ---------------------------------------------------------------------------
# root finding (Aberth-Ehrlich simultaneous iteration)


def _aberth_batch(C):
    """All roots of each row of C (ascending coeffs, nonzero leading column).

    Returns (m, n) roots, unordered within rows.  Raises NonConvergence if
    any row misses the residual bound after the iteration cap.
    """
    C = np.asarray(C, dtype=complex)
    m, n1 = C.shape
    n = n1 - 1
    if n == 0:
        return np.empty((m, 0), dtype=complex)
    if n == 1:
        return (-C[:, 0] / C[:, 1])[:, None]

    lead = C[:, -1:]
    Cm = C / lead  # monic
    radius = 1.0 + np.max(np.abs(Cm[:, :-1]), axis=1)
    # deterministic start: Cauchy circle with a fixed symmetry-breaking offset
    angles = 2.0 * np.pi * (np.arange(n) + 0.354) / n + 0.5
    z = radius[:, None] * np.exp(1j * angles)[None, :]
    Cd = Cm[:, 1:] * np.arange(1, n + 1)

    eye = np.eye(n, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(_ABERTH_MAX_ITER):
            p = _horner_rows(Cm, z)
            pd = _horner_rows(Cd, z)
            pd = np.where(pd == 0, 1e-300, pd)
            newton = p / pd
            diff = z[:, :, None] - z[:, None, :]
            diff[:, eye] = np.inf
            repel = np.sum(1.0 / diff, axis=2)
            denom = 1.0 - newton * repel
            denom = np.where(denom == 0, 1.0, denom)
            step = newton / denom
            # reset any non-finite iterate deterministically inside the disc
            bad = ~np.isfinite(step)
            if np.any(bad):
                step = np.where(bad, 0.0, step)
                z = np.where(bad, 0.5 * radius[:, None] * np.exp(1j * angles), z)
            z = z - step
            small = np.abs(step) <= 1e-13 * (1.0 + np.abs(z))
            if np.all(small):
                break

    resid = np.abs(_horner_rows(C, z))
    bound = _ROOT_RESID * (1.0 + np.max(np.abs(C), axis=1))[:, None] * (
        1.0 + np.abs(z)
    ) ** n
    ok = resid <= bound
    if not np.all(ok):
        bad_rows = np.flatnonzero(~np.all(ok, axis=1))
        raise NonConvergence(
            f"root solver missed the residual bound on {bad_rows.size} "
            f"polynomial(s); first failing row index {bad_rows[0]}"
        )
    return z


def _sort_rows_canonical(roots):
    """Sort each row of a complex matrix by (re, im) for determinism."""
    m, n = roots.shape
    if n <= 1:
        return roots
    rows = np.repeat(np.arange(m), n)
    order = np.lexsort((roots.imag.ravel(), roots.real.ravel(), rows))
    return roots.ravel()[order].reshape(m, n)


def poly_roots(coeffs) -> list[complex]:
    """All complex roots of a polynomial, multiplicity as repeated entries.

    Uses Aberth-Ehrlich simultaneous iteration from a deterministic start,
    so the result is reproducible.  Residual acceptance per root:
    |p(root)| <= 1e-8 * (1 + max|coeff|) * (1 + |root|)^degree.
    """
    p = coeffs if isinstance(coeffs, Polynomial) else Polynomial(coeffs)
    if p.is_zero:
        raise ValueError("zero polynomial has no well-defined root set")
    if p.degree == 0:
        return []
    roots = _aberth_batch(p.coeffs[None, :])
    roots = _sort_rows_canonical(roots)
    return [complex(r) for r in roots[0]]


def _quadratic_roots_batch(C):
    """Stable closed-form roots for (m, 3) quadratic coefficient rows."""
    c0, c1, c2 = C[:, 0], C[:, 1], C[:, 2]
    disc = c1 * c1 - 4.0 * c2 * c0
    sq = np.sqrt(disc)
    # pick the sign that avoids cancellation in -b -+ sqrt(disc)
    flip = np.real(np.conj(c1) * sq) < 0
    sq = np.where(flip, -sq, sq)
    q = -0.5 * (c1 + sq)
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = q / c2
        r2 = np.where(q != 0, c0 / np.where(q == 0, 1.0, q), 0.0)
    r1 = np.where(np.isfinite(r1), r1, 0.0)
    return np.stack([r1, r2], axis=1)


def roots_batch(C):
    """Roots for a batch of same-degree polynomials, canonically ordered.

    C is (m, n+1) ascending with a nonzero leading column.  Degree 1 and 2
    take closed forms; higher degrees run the simultaneous iteration.
    """
    n = C.shape[1] - 1
    if n == 1:
        return (-C[:, 0] / C[:, 1])[:, None]
    if n == 2:
        return _sort_rows_canonical(_quadratic_roots_batch(C))
    return _sort_rows_canonical(_aberth_batch(C))


# ---------------------------------------------------------------------------
# rational maps


class RationalMap:
    """Rational self-map of the sphere, stored as a reduced fraction P/Q.

    Validation rejects shared roots of P and Q (within chordal 1e-8), so
    evaluation is total: a vanishing denominator means a genuine pole.
    """

    __slots__ = (
        "num",
        "den",
        "degree",
        "_num_pad",
        "_den_pad",
        "_num_rev",
        "_den_rev",
        "_wron",
        "_wron_rev",
        "_wron_deg_slack",
    )

    def __init__(self, num, den=(1.0,)):
        self.num = num if isinstance(num, Polynomial) else Polynomial(num)
        self.den = den if isinstance(den, Polynomial) else Polynomial(den)
        if self.num.is_zero or self.den.is_zero:
            raise ValueError("numerator and denominator must be nonzero")
        self.degree = max(self.num.degree, self.den.degree)
        if self.degree < 1:
            raise ValueError("map must have degree >= 1 (not constant)")
        self._check_reduced()

        d = self.degree
        self._num_pad = _pad(self.num.coeffs, d + 1)
        self._den_pad = _pad(self.den.coeffs, d + 1)
        self._num_rev = self._num_pad[::-1].copy()
        self._den_rev = self._den_pad[::-1].copy()
        wron = self.num.deriv() * self.den - self.num * self.den.deriv()
        if wron.is_zero:
            raise ValueError("map is constant (vanishing derivative)")
        self._wron = wron
        wdeg = 2 * d - 2
        self._wron_deg_slack = wdeg - wron.degree  # multiplicity of infinity as a critical point
        self._wron_rev = _reversed_padded(wron.coeffs, wdeg)

    def _check_reduced(self):
        if self.num.degree == 0 or self.den.degree == 0:
            return
        rn = poly_roots(self.num)
        rd = poly_roots(self.den)
        for a in rn:
            for b in rd:
                if chordal_distance(a, b) <= 1e-8:
                    raise ValueError(
                        f"numerator and denominator share a root near {a}"
                    )

    # -- evaluation ---------------------------------------------------------

    def __call__(self, point) -> SpherePoint:
        pt = SpherePoint.of(point)
        if pt.is_infinite:
            return self._ratio_point(self._num_rev[0], self._den_rev[0])
        z = pt.value
        if abs(z) <= 1.0:
            return self._ratio_point(horner(self.num.coeffs, z), horner(self.den.coeffs, z))
        w = 1.0 / z
        return self._ratio_point(horner(self._num_rev, w), horner(self._den_rev, w))

    @staticmethod
    def _ratio_point(pz, qz):
        if qz == 0:
            if pz != 0:
                return INF
            # a reduced map cannot make both vanish; only unvalidated input
            # squeaking past the shared-root tolerance can land here
            raise ArithmeticError("evaluation hit an unreduced 0/0")
        return SpherePoint.of(pz / qz)

    def eval_many(self, z):
        """Evaluate at an array of finite points; returns (values, inf_mask)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        inf = np.zeros(z.shape, dtype=bool)
        near = np.abs(z) <= 1.0
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            if np.any(near):
                zn = z[near]
                pz = horner(self.num.coeffs, zn)
                qz = horner(self.den.coeffs, zn)
                vals, infm = self._ratio_many(pz, qz)
                out[near] = vals
                inf[near] = infm
            far = ~near
            if np.any(far):
                w = 1.0 / z[far]
                pz = horner(self._num_rev, w)
                qz = horner(self._den_rev, w)
                vals, infm = self._ratio_many(pz, qz)
                out[far] = vals
                inf[far] = infm
        return out, inf

    @staticmethod
    def _ratio_many(pz, qz):
        pole = qz == 0
        safe_q = np.where(pole, 1.0, qz)
        vals = pz / safe_q
        big = ~np.isfinite(vals) | (np.abs(vals.real) > BIG_MODULUS) | (
            np.abs(vals.imag) > BIG_MODULUS
        )
        inf = pole | big
        vals = np.where(inf, 0.0, vals)
        return vals, inf

    # -- spherical derivative norm -------------------------------------------

    def spherical_derivative_norm(self, point) -> float:
        """Norm of the derivative in the spherical metric.

        Equals |f'(z)| (1+|z|^2)/(1+|f(z)|^2) on the finite chart; evaluated
        through the 1/z chart when |z| > 1 so the two charts agree to
        relative 1e-10 on their overlap and the value is finite everywhere.
        """
        pt = SpherePoint.of(point)
        if pt.is_infinite:
            return self._deriv_rev(np.array([0.0 + 0.0j]))[0]
        z = pt.value
        if abs(z) <= 1.0:
            return self._deriv_fwd(np.array([z]))[0]
        return self._deriv_rev(np.array([1.0 / z]))[0]

    def _deriv_fwd(self, z):
        wz = np.abs(horner(self._wron.coeffs, z))
        pz = np.abs(horner(self.num.coeffs, z))
        qz = np.abs(horner(self.den.coeffs, z))
        return wz * (1.0 + np.abs(z) ** 2) / (pz * pz + qz * qz)

    def _deriv_rev(self, w):
        wz = np.abs(horner(self._wron_rev, w))
        pz = np.abs(horner(self._num_rev, w))
        qz = np.abs(horner(self._den_rev, w))
        return wz * (1.0 + np.abs(w) ** 2) / (pz * pz + qz * qz)

    def spherical_derivative_norm_many(self, z, inf=None):
        """Vectorized spherical derivative norm over parallel point arrays."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape)
        if inf is None:
            inf = np.zeros(z.shape, dtype=bool)
        near = (~inf) & (np.abs(z) <= 1.0)
        far = (~inf) & ~near
        if np.any(near):
            out[near] = self._deriv_fwd(z[near])
        if np.any(far):
            out[far] = self._deriv_rev(1.0 / z[far])
        if np.any(inf):
            out[inf] = self._deriv_rev(np.zeros(int(np.sum(inf)), dtype=complex))
        return out

    # -- preimages ------------------------------------------------------------

    def preimages(self, point) -> list[SpherePoint]:
        """All degree-many solutions w of f(w) = point, with multiplicity."""
        pt = SpherePoint.of(point)
        d = self.degree
        if pt.is_infinite:
            finite = poly_roots(self.den) if self.den.degree >= 1 else []
            pad = d - len(finite)
            pts = [SpherePoint.of(r) for r in finite] + [INF] * pad
        else:
            coeffs = self._num_pad - pt.value * self._den_pad
            pts = self._roots_with_inf_padding(coeffs, abs(pt.value))
        return sorted(pts, key=SpherePoint.sort_key)

    def _roots_with_inf_padding(self, coeffs, zmag):
        d = self.degree
        # leading coefficients cancel when the target matches the ratio of
        # top coefficients; strip and pad with the point at infinity
        tol = 1e-12 * (
            abs(self._num_pad[d]) + zmag * abs(self._den_pad[d]) + 1e-300
        )
        c = coeffs.copy()
        n = c.size
        while n > 1 and abs(c[n - 1]) <= tol:
            n -= 1
        c = c[:n]
        n_inf = d - (n - 1)
        if n == 1:
            return [INF] * d
        roots = poly_roots(Polynomial(c))
        return [SpherePoint.of(r) for r in roots] + [INF] * n_inf

    def preimages_many(self, z):
        """Preimages for an array of finite targets.

        Returns (roots, inf_mask) of shape (m, degree).  Rows where the
        leading coefficient cancels fall back to the scalar path.
        """
        z = np.asarray(z, dtype=complex)
        m = z.size
        d = self.degree
        C = self._num_pad[None, :] - z[:, None] * self._den_pad[None, :]
        tol = 1e-12 * (
            abs(self._num_pad[d]) + np.abs(z) * abs(self._den_pad[d]) + 1e-300
        )
        degenerate = np.abs(C[:, -1]) <= tol
        roots = np.zeros((m, d), dtype=complex)
        infm = np.zeros((m, d), dtype=bool)
        regular = ~degenerate
        if np.any(regular):
            roots[regular] = roots_batch(C[regular])
        for i in np.flatnonzero(degenerate):
            pts = self.preimages(complex(z[i]))
            for k, p in enumerate(pts):
                if p.is_infinite:
                    infm[i, k] = True
                else:
                    roots[i, k] = p.value
        return roots, infm

    # -- critical and fixed points ---------------------------------------------

    def critical_points(self) -> list[SpherePoint]:
        """Zeros of the derivative on the sphere, with multiplicity (2d-2 total).

        Infinity is critical exactly when the Wronskian P'Q - PQ' drops below
        degree 2d-2; the drop is its multiplicity.
        """
        pts = [SpherePoint.of(r) for r in poly_roots(self._wron)]
        pts += [INF] * self._wron_deg_slack
        return sorted(pts, key=SpherePoint.sort_key)

    def critical_values(self) -> list[SpherePoint]:
        return [self(p) for p in self.critical_points()]

    def fixed_points(self) -> list[tuple[SpherePoint, float]]:
        """Fixed points with spherical multiplier norms, canonically ordered.

        A point is repelling exactly when its norm exceeds 1.  Infinity is
        fixed precisely when deg P > deg Q (e.g. for polynomials).
        """
        shifted = np.concatenate(([0.0], self.den.coeffs))  # z * Q(z)
        n = max(self.num.coeffs.size, shifted.size)
        coeffs = _pad(self.num.coeffs, n) - _pad(shifted, n)
        out = []
        fp = Polynomial(coeffs) if np.any(coeffs != 0) else None
        if fp is not None and fp.degree >= 1:
            for r in poly_roots(fp):
                p = SpherePoint.of(r)
                out.append((p, float(self.spherical_derivative_norm(p))))
        if self.num.degree > self.den.degree:
            out.append((INF, float(self.spherical_derivative_norm(INF))))
        out.sort(key=lambda t: t[0].sort_key())
        return out

    def __repr__(self):
        return f"RationalMap({self.num.coeffs.tolist()!r}, {self.den.coeffs.tolist()!r})"


def polynomial_map(coeffs) -> RationalMap:
    """Convenience constructor for a polynomial map (denominator 1)."""
    return RationalMap(coeffs, (1.0,))
