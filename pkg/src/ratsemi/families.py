"""One-parameter map families: instantiation, Bowen-parameter sweeps over
grids in the parameter plane, and sub-mean-value / smoothness diagnostics.

A family holds generators whose numerator and denominator coefficients are
polynomials in a single complex parameter.  Instantiating at a parameter value
evaluates every coefficient polynomial and builds the multi-map; sweeps run
the Bowen-parameter solver per grid point and record failures as row statuses
instead of raising.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import Polynomial as LambdaPoly

from .dynamics import MultiMap
from .errors import (
    CriticalPreimage,
    HyperbolicityUnverified,
    InsufficientPoints,
    InvalidInstance,
    NonConvergence,
    NoRepellingSeed,
    NoSignChange,
)
from .sphere import RationalMap
from .thermo import ThermoConfig, bowen_parameter


def _as_poly(c) -> LambdaPoly:
    if isinstance(c, LambdaPoly):
        return c
    if isinstance(c, (int, float, complex, np.number)):
        return LambdaPoly([complex(c)])
    return LambdaPoly(np.asarray(c, dtype=complex))


# ---------------------------------------------------------------------------
# parameter domains


@dataclass(frozen=True)
class RectDomain:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min <= self.re_max and self.im_min <= self.im_max):
            raise ValueError("rectangle bounds must be ordered")

    def contains(self, lam: complex) -> bool:
        return (
            self.re_min <= lam.real <= self.re_max
            and self.im_min <= lam.imag <= self.im_max
        )


@dataclass(frozen=True)
class AnnulusDomain:
    center: complex
    r1: float
    r2: float

    def __post_init__(self):
        if not 0 <= self.r1 < self.r2:
            raise ValueError("annulus needs 0 <= r1 < r2")

    def contains(self, lam: complex) -> bool:
        return self.r1 <= abs(lam - self.center) <= self.r2


@dataclass
class FamilySpec:
    """Generators as (numerator, denominator) tuples of coefficient
    polynomials in the parameter, plus the parameter domain and punctures."""

    generators: tuple
    domain: object
    excluded: tuple = ()
    puncture_tol: float = 1e-9

    def __post_init__(self):
        gens = []
        for num, den in self.generators:
            gens.append(
                (
                    tuple(_as_poly(c) for c in num),
                    tuple(_as_poly(c) for c in den),
                )
            )
        self.generators = tuple(gens)
        self.excluded = tuple(complex(p) for p in self.excluded)
        if not self.generators:
            raise ValueError("family needs at least one generator")
        if not hasattr(self.domain, "contains"):
            raise TypeError("domain must provide a contains() test")


def instantiate(fam: FamilySpec, lam) -> MultiMap:
    """Evaluate every coefficient polynomial at the parameter and build the
    multi-map; any degeneracy surfaces as InvalidInstance."""
    lam = complex(lam)
    if not fam.domain.contains(lam):
        raise InvalidInstance(f"parameter {lam} lies outside the family domain")
    for p in fam.excluded:
        if abs(lam - p) <= fam.puncture_tol:
            raise InvalidInstance(f"parameter {lam} is an excluded puncture")
    maps = []
    for k, (num_polys, den_polys) in enumerate(fam.generators, start=1):
        num = [q(lam) for q in num_polys]
        den = [q(lam) for q in den_polys]
        try:
            maps.append(RationalMap(num, den))
        except ValueError as e:
            raise InvalidInstance(
                f"generator {k} is degenerate at parameter {lam}: {e}"
            ) from e
    return MultiMap(maps)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class GridSpec:
    """Rectangular parameter grid; rows are emitted with the real axis as the
    outer loop and the imaginary axis as the inner loop."""

    re_min: float
    re_max: float
    re_n: int
    im_min: float
    im_max: float
    im_n: int

    def __post_init__(self):
        if self.re_n < 1 or self.im_n < 1:
            raise ValueError("grid needs at least one point per axis")
        if self.re_min > self.re_max or self.im_min > self.im_max:
            raise ValueError("grid bounds must be ordered")

    @property
    def re_values(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.re_n)

    @property
    def im_values(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.im_n)

    def points(self):
        for re in self.re_values:
            for im in self.im_values:
                yield complex(re, im)


@dataclass
class SweepRow:
    lam: complex
    delta: float | None
    pressure_residual: float | None
    depth: int | None
    status: str
    delta_error: float | None


@dataclass
class SweepTable:
    rows: list
    grid: GridSpec
    config: ThermoConfig

    @property
    def shape(self):
        return (self.grid.re_n, self.grid.im_n)

    def row_at(self, i: int, j: int) -> SweepRow:
        return self.rows[i * self.grid.im_n + j]

    def delta_grid(self) -> np.ndarray:
        out = np.full(self.shape, np.nan)
        for i in range(self.grid.re_n):
            for j in range(self.grid.im_n):
                r = self.row_at(i, j)
                if r.status == "ok":
                    out[i, j] = r.delta
        return out

    def error_scale(self) -> float:
        errs = [r.delta_error for r in self.rows if r.status == "ok"]
        if not errs:
            return math.nan
        return float(np.median(errs))


_FAILURE_STATUS = (
    (InvalidInstance, "invalid-instance"),
    (NoRepellingSeed, "seed-failure"),
    (NoSignChange, "no-sign-change"),
    (CriticalPreimage, "critical-preimage"),
    (HyperbolicityUnverified, "hyperbolicity-unverified"),
    (NonConvergence, "non-convergence"),
)
_FAILURE_TYPES = tuple(cls for cls, _ in _FAILURE_STATUS)


def sweep_delta(fam: FamilySpec, grid: GridSpec, config: ThermoConfig | None = None,
                **overrides) -> SweepTable:
    """Bowen parameter per grid point; per-row failure statuses, never raises
    for an individual parameter value."""
    cfg = replace(config if config is not None else ThermoConfig(), **overrides)
    rows = []
    for lam in grid.points():
        try:
            mm = instantiate(fam, lam)
            res = bowen_parameter(mm, cfg)
        except _FAILURE_TYPES as e:
            status = next(s for cls, s in _FAILURE_STATUS if isinstance(e, cls))
            rows.append(SweepRow(lam, None, None, None, status, None))
        else:
            rows.append(
                SweepRow(lam, res.delta, res.pressure_residual, res.depth,
                         "ok", res.delta_error)
            )
    return SweepTable(rows, grid, cfg)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class SubmeanReport:
    radius: int
    tol_sub: float
    centers_checked: int
    worst_violation: float
    worst_at: complex | None
    worst_reciprocal_violation: float
    worst_reciprocal_at: complex | None
    flagged: list
    verdict: str


def _ring_offsets(k: int):
    offs = []
    for di in range(-k, k + 1):
        for dj in range(-k, k + 1):
            if max(abs(di), abs(dj)) == k:
                offs.append((di, dj))
    return offs


def submean_diagnostic(table: SweepTable, radius: int = 1) -> SubmeanReport:
    """Discrete sub-mean-value check: at every interior ok-point, the value
    must not exceed the mean over the surrounding grid ring by more than
    tol_sub, and its reciprocal must not fall under the reciprocal ring mean
    by more than tol_sub.  tol_sub = 3x the median per-row delta error."""
    k = int(radius)
    if k < 1:
        raise ValueError("radius must be a positive number of grid steps")
    D = table.delta_grid()
    re_n, im_n = table.shape
    scale = table.error_scale()
    tol_sub = 3.0 * scale if math.isfinite(scale) else math.inf
    offs = _ring_offsets(k)
    checked = 0
    worst = -math.inf
    worst_at = None
    worst_inv = -math.inf
    worst_inv_at = None
    flagged = []
    for i in range(k, re_n - k):
        for j in range(k, im_n - k):
            center = D[i, j]
            if not math.isfinite(center):
                continue
            ring = np.array([D[i + di, j + dj] for di, dj in offs])
            if not np.all(np.isfinite(ring)):
                continue
            checked += 1
            lam = complex(table.row_at(i, j).lam)
            v = center - float(ring.mean())
            vi = float((1.0 / ring).mean()) - 1.0 / center
            if v > worst:
                worst, worst_at = v, lam
            if vi > worst_inv:
                worst_inv, worst_inv_at = vi, lam
            if v > tol_sub or vi > tol_sub:
                flagged.append((lam, max(v, vi)))
    if checked == 0:
        verdict = "inconclusive"
    else:
        verdict = "fail" if flagged else "pass"
    return SubmeanReport(k, tol_sub, checked, worst, worst_at, worst_inv,
                         worst_inv_at, flagged, verdict)


@dataclass
class SmoothnessReport:
    line: tuple
    fit_degree: int
    points_used: int
    max_residual: float
    error_scale: float
    residual_ratio: float
    coefficients: np.ndarray
    min_psh_indicator: float | None
    psh_noise: float | None
    psh_argmin: complex | None


def smoothness_diagnostic(table: SweepTable, line, fit_degree: int = 4) -> SmoothnessReport:
    """Polynomial-fit residuals along one grid line (a proxy smoothness probe)
    plus the minimum finite-difference value of phi*lap(phi) - 2|grad(phi)|^2
    over the grid interior.  The second quantity is reported with a noise
    estimate and carries no verdict: second differences amplify estimator
    noise."""
    axis, idx = line
    re_n, im_n = table.shape
    if axis == "row":
        params = table.grid.im_values
        rows = [table.row_at(idx, j) for j in range(im_n)]
    elif axis == "col":
        params = table.grid.re_values
        rows = [table.row_at(i, idx) for i in range(re_n)]
    else:
        raise ValueError("line must be ('row', i) or ('col', j)")
    s = np.array([p for p, r in zip(params, rows) if r.status == "ok"])
    phi = np.array([r.delta for r in rows if r.status == "ok"])
    if s.size < fit_degree + 4:
        raise InsufficientPoints(
            f"{s.size} usable points on the line; need {fit_degree + 4}"
        )
    errs = [r.delta_error for r in rows if r.status == "ok"]
    scale = max(float(np.median(errs)), 1e-15)
    coeffs = np.polyfit(s, phi, fit_degree)
    resid = phi - np.polyval(coeffs, s)
    max_resid = float(np.max(np.abs(resid)))

    min_q = noise = argmin = None
    if re_n >= 3 and im_n >= 3:
        D = table.delta_grid()
        hx = (table.grid.re_max - table.grid.re_min) / (re_n - 1)
        hy = (table.grid.im_max - table.grid.im_min) / (im_n - 1)
        e = table.error_scale()
        best = math.inf
        for i in range(1, re_n - 1):
            for j in range(1, im_n - 1):
                stencil = D[i - 1 : i + 2, j - 1 : j + 2]
                if not np.all(np.isfinite(stencil[1, :])) or not np.all(
                    np.isfinite(stencil[:, 1])
                ):
                    continue
                lap = (D[i + 1, j] + D[i - 1, j] - 2 * D[i, j]) / hx**2 + (
                    D[i, j + 1] + D[i, j - 1] - 2 * D[i, j]
                ) / hy**2
                gx = (D[i + 1, j] - D[i - 1, j]) / (2 * hx)
                gy = (D[i, j + 1] - D[i, j - 1]) / (2 * hy)
                q = D[i, j] * lap - 2.0 * (gx * gx + gy * gy)
                if q < best:
                    best = q
                    argmin = complex(table.row_at(i, j).lam)
                    # first-order error propagation of the per-row delta error
                    noise = (
                        abs(D[i, j]) * (4 * e / hx**2 + 4 * e / hy**2)
                        + abs(lap) * e
                        + 4 * (abs(gx) / hx + abs(gy) / hy) * e
                    )
        if math.isfinite(best):
            min_q = float(best)
    return SmoothnessReport(
        (axis, idx), fit_degree, int(s.size), max_resid, scale,
        max_resid / scale, coeffs, min_q, noise, argmin,
    )


# ---------------------------------------------------------------------------
# shipped reference families


def annulus_family() -> FamilySpec:
    """(z^2, c z^2): the second generator's scale is the parameter; Julia
    clouds fill round annuli and the Bowen parameter stays 2."""
    z2 = ((0.0, 0.0, 1.0), (1.0,))
    cz2 = ((0.0, 0.0, LambdaPoly([0.0, 1.0])), (1.0,))
    return FamilySpec(
        generators=(z2, cz2),
        domain=RectDomain(-0.99, 0.99, -0.99, 0.99),
    )


def similarity_family(vertices) -> FamilySpec:
    """Three degree-one maps (z - p + p*c)/c whose inverse branches contract
    toward the given vertices with complex ratio c; at c = 1/2 this is the
    doubling triple 2z - p."""
    gens = []
    for p in vertices:
        p = complex(p)
        num = (LambdaPoly([-p, p]), LambdaPoly([1.0]))
        den = (LambdaPoly([0.0, 1.0]),)
        gens.append((num, den))
    return FamilySpec(
        generators=tuple(gens),
        domain=RectDomain(-0.99, 0.99, -0.99, 0.99),
        excluded=(0.0,),
    )


def power_pair_family() -> FamilySpec:
    """(z^2, c z^3): mixed-degree sanity family."""
    z2 = ((0.0, 0.0, 1.0), (1.0,))
    cz3 = ((0.0, 0.0, 0.0, LambdaPoly([0.0, 1.0])), (1.0,))
    return FamilySpec(
        generators=(z2, cz3),
        domain=RectDomain(-0.99, 0.99, -0.99, 0.99),
        excluded=(0.0,),
    )
