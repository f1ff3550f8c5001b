"""Independent oracles and frozen expected values for the test suite.

Every frozen constant states how it was computed.  The helpers here are
deliberately written with different machinery than the library (np.roots
companion matrices instead of simultaneous iteration, explicit word
enumeration instead of level-by-level trees) so each test compares two
independent routes to the same number.
"""
import itertools
import math

import numpy as np

# ---------------------------------------------------------------------------
# frozen constants

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)

# Bowen parameters of equal-degree power-map tuples: 1 + log s / log m for s
# generators all of degree m (closed form for z^m repeated s times).
DELTA_Z2_Z2 = 2.0
DELTA_Z2_Z2_Z2 = 1.0 + LOG3 / LOG2          # 2.5849625007211562
DELTA_Z3_Z3 = 1.0 + LOG2 / LOG3             # 1.6309297535714573

# Unique root of 2^(1-t) + 3^(1-t) = 1, computed with scipy.optimize.brentq
# at xtol 1e-15 and frozen here to 12 digits.
DELTA_Z2_Z3 = 1.787884911026

# Similarity dimension of the three-map half-scale triangle system:
# 3 * (1/2)^t = 1.
DELTA_GASKET = LOG3 / LOG2                  # 1.5849625007211562

# Centered equilateral triangle of unit side (diameter 1, barycenter 0).
TRIANGLE_UNIT = tuple(
    p - (0.5 + 0.5j * math.sqrt(3.0) / 3.0)
    for p in (0.0 + 0.0j, 1.0 + 0.0j, 0.5 + 0.5j * math.sqrt(3.0))
)
# Same triangle before centering (vertices 0, 1, (1+i sqrt 3)/2).
TRIANGLE_RAW = (0.0 + 0.0j, 1.0 + 0.0j, 0.5 + 0.5j * math.sqrt(3.0))


# ---------------------------------------------------------------------------
# independent root finding and polynomial helpers


def np_roots(coeffs_ascending):
    """Roots via the numpy companion-matrix solver (independent of the
    library's simultaneous iteration)."""
    c = np.asarray(coeffs_ascending, dtype=complex)
    return np.roots(c[::-1])


def sorted_points(values):
    vals = [complex(v) for v in values]
    return sorted(vals, key=lambda z: (z.real, z.imag))


def poly_compose(outer, inner):
    """Coefficients of outer(inner(z)), both ascending."""
    out = np.array([0.0 + 0.0j])
    acc = np.array([1.0 + 0.0j])  # inner^0
    inner = np.asarray(inner, dtype=complex)
    for c in np.asarray(outer, dtype=complex):
        term = c * acc
        n = max(out.size, term.size)
        new = np.zeros(n, dtype=complex)
        new[: out.size] += out
        new[: term.size] += term
        out = new
        acc = np.convolve(acc, inner)
    return out


# ---------------------------------------------------------------------------
# brute-force spherical geometry


def chordal_bf(a, b):
    """Direct chordal distance; a and b are complex or the string 'inf'."""
    ainf = isinstance(a, str)
    binf = isinstance(b, str)
    if ainf and binf:
        return 0.0
    if ainf or binf:
        w = b if ainf else a
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    return 2.0 * abs(a - b) / math.sqrt((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))


def sph_deriv_bf(num, den, z, h=None):
    """Spherical derivative norm from the defining formula with an explicit
    |f'| from the quotient rule; no chart tricks, small moduli only."""
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    p = np.polyval(num[::-1], z)
    q = np.polyval(den[::-1], z)
    dp = np.polyval(np.polyder(num[::-1]), z) if num.size > 1 else 0.0
    dq = np.polyval(np.polyder(den[::-1]), z) if den.size > 1 else 0.0
    fprime = (dp * q - p * dq) / q**2
    f = p / q
    return abs(fprime) * (1.0 + abs(z) ** 2) / (1.0 + abs(f) ** 2)


# ---------------------------------------------------------------------------
# brute-force transfer sums (explicit word enumeration, np.roots preimages)


def transfer_sum_bf(gen_coeffs, t, z, n):
    """S_n(t, z) by enumerating all length-n words and all preimages, with
    np.roots as the root finder.  gen_coeffs: list of (num, den) ascending
    coefficient tuples of polynomial maps (den == (1,) assumed).
    """
    total = 0.0
    s = len(gen_coeffs)
    for word in itertools.product(range(s), repeat=n):
        # preimages y with f_{w_n}(...f_{w_1}(y)...) = z: peel from the outside
        targets = [complex(z)]
        for sym in reversed(word):
            num, _den = gen_coeffs[sym]
            new_targets = []
            for tgt in targets:
                c = np.asarray(num, dtype=complex).copy()
                c[0] -= tgt
                new_targets.extend(np_roots(c))
            targets = new_targets
        # now targets are the level-n preimages along this word; weight each
        for y in targets:
            d = 1.0
            x = y
            for sym in word:
                num, den = gen_coeffs[sym]
                d *= sph_deriv_bf(num, den, x)
                x = np.polyval(np.asarray(num, dtype=complex)[::-1], x)
            total += d ** (-t)
    return total


def power_beta(degrees, t):
    """Closed-form level-sum base for power maps: sum_j d_j^(1-t)."""
    return math.fsum(float(d) ** (1.0 - t) for d in degrees)


def moran_root_bf(ratios, lo=0.0, hi=64.0):
    """Moran equation root via scipy brentq (independent of the library's
    bisection)."""
    from scipy.optimize import brentq

    f = lambda t: math.fsum(r**t for r in ratios) - 1.0
    if f(lo) <= 0.0:
        return lo
    return brentq(f, lo, hi, xtol=1e-13)


def box_count_bf(points, eps, origin):
    """Occupied-box count at one scale, done with a Python set of cells."""
    cells = set()
    x0, y0 = origin
    for z in points:
        cells.add((math.floor((z.real - x0) / eps), math.floor((z.imag - y0) / eps)))
    return len(cells)
