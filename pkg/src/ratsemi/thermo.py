"""Transfer-operator level sums, pressure, Bowen parameter, spectrum diagnostics.

The level sum S_n(t, z) adds ||(f_w)'(y)||^(-t) over every length-n word w
and every solution of f_w(y) = z, with multiplicity.  The pressure estimate
is the consecutive-level log ratio log(S_n / S_{n-1}), which kills constant
prefactors and converges geometrically for expanding systems.  The Bowen
parameter is the bisection root of t -> P(t).

A preimage tree's geometry does not depend on t, so one tree is built per
basepoint and shared by every pressure evaluation of a root search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .dynamics import (
    DEFAULT_CAP,
    MultiMap,
    _expand_backward,
    _root_level,
    _subsample_level,
    check_hyperbolic,
    repelling_seed,
)
from .errors import (
    CriticalPreimage,
    HyperbolicityUnverified,
    NonConvergence,
    NoSignChange,
)
from .sphere import SpherePoint

_CRIT_NORM = 1e-12
DEFAULT_TREE_DEPTH = 10


@dataclass(frozen=True)
class ThermoConfig:
    """Shared knobs for pressure evaluation and Bowen root finding."""

    depth: int = DEFAULT_TREE_DEPTH
    cap: int = DEFAULT_CAP
    rng_seed: int = 0
    rtol_pressure: float = 1e-6   # early stop once the last 3 ratios agree this well
    tol_t: float = 1e-4           # bracket width for the Bowen bisection
    tol_p: float = 1e-3           # |P(delta)| at the accepted root
    t_max: float = 64.0           # giving up point for the sign-change hunt
    force: bool = False           # skip the hyperbolicity gate
    hyper_depth: int = 6
    hyper_margin: float = 0.05
    hyper_cap: int = 50_000


@dataclass
class PressureEstimate:
    t: float
    value: float
    depth: int
    basepoint: SpherePoint
    ratio_history: list
    residual: float


@dataclass
class BowenResult:
    delta: float
    bracket: tuple
    pressure_at_delta: float
    iterations: int
    depth: int
    history: list
    pressure_residual: float
    delta_error: float


@dataclass
class SpectrumDiagnostics:
    t: float
    lyapunov: float
    entropy: float
    pressure: float
    residual: float
    depth: int


def _level_min_step_norm(mm: MultiMap, level) -> float:
    """Smallest single-generator derivative norm among a level's entries."""
    if level.size == 0:
        return math.inf
    first = level.words[:, -1]
    out = math.inf
    for j, f in enumerate(mm.generators, start=1):
        mask = first == j
        if np.any(mask):
            norms = f.spherical_derivative_norm_many(level.z[mask], level.inf[mask])
            out = min(out, float(norms.min()))
    return out


class PreimageTree:
    """Lazily extended backward tree from a basepoint, shared across t."""

    def __init__(self, mm: MultiMap, basepoint, cap: int = DEFAULT_CAP, rng_seed: int = 0):
        self.mm = mm
        self.basepoint = SpherePoint.of(basepoint)
        self.cap = int(cap)
        self.rng_seed = int(rng_seed)
        self.levels = [_root_level(self.basepoint)]
        self.min_step_norm = [math.inf]  # level 0 carries no derivative step

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def extend(self, n: int) -> None:
        while self.depth < n:
            k = self.depth + 1
            nxt = _subsample_level(
                _expand_backward(self.mm, self.levels[-1]), self.cap, self.rng_seed, k
            )
            self.levels.append(nxt)
            self.min_step_norm.append(_level_min_step_norm(self.mm, nxt))

    def log_level_sum(self, t: float, n: int) -> float:
        """log S_n(t): importance weights keep the capped sum unbiased."""
        self.extend(n)
        if t > 0 and min(self.min_step_norm[1 : n + 1]) < _CRIT_NORM:
            bad = min(self.min_step_norm[1 : n + 1])
            raise CriticalPreimage(
                f"preimage tree of {self.basepoint} hits derivative norm {bad:.3e} "
                f"within depth {n}; pick another basepoint"
            )
        lev = self.levels[n]
        if t == 0.0:
            # avoid 0 * (-inf) = nan when the tree contains critical preimages
            return float(logsumexp(lev.logw))
        return float(logsumexp(lev.logw - t * lev.logd))


def _estimate_on_tree(
    tree: PreimageTree, t: float, depth: int, rtol: float
) -> PressureEstimate:
    if depth < 2:
        raise ValueError("pressure estimation needs depth >= 2")
    prev = tree.log_level_sum(t, 1)
    ratios = []
    used = 1
    for n in range(2, depth + 1):
        cur = tree.log_level_sum(t, n)
        ratios.append(cur - prev)
        prev = cur
        used = n
        if len(ratios) >= 3 and max(ratios[-3:]) - min(ratios[-3:]) <= rtol:
            break
    residual = (
        max(ratios[-3:]) - min(ratios[-3:]) if len(ratios) >= 3 else math.inf
    )
    return PressureEstimate(
        t=float(t),
        value=float(ratios[-1]),
        depth=used,
        basepoint=tree.basepoint,
        ratio_history=[float(r) for r in ratios],
        residual=float(residual),
    )


def _default_basepoint(mm: MultiMap, z):
    if z is None:
        return repelling_seed(mm)[0]
    return SpherePoint.of(z)


def transfer_level_sum(
    mm: MultiMap,
    t: float,
    z,
    n: int,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
) -> float:
    """S_n(t, z), the level-n transfer-operator sum at the constant function 1."""
    if n < 1:
        raise ValueError("level index must be >= 1")
    tree = PreimageTree(mm, z, cap=cap, rng_seed=rng_seed)
    return math.exp(tree.log_level_sum(t, n))


def pressure(
    mm: MultiMap,
    t: float,
    z=None,
    n: int = DEFAULT_TREE_DEPTH,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
    rtol: float = 1e-6,
) -> PressureEstimate:
    """Topological pressure estimate at t from a depth-n preimage tree.

    The basepoint defaults to the deterministic repelling seed.  Stops early
    once the last three log ratios agree within rtol.
    """
    tree = PreimageTree(mm, _default_basepoint(mm, z), cap=cap, rng_seed=rng_seed)
    return _estimate_on_tree(tree, t, n, rtol)


def pressure_curve(
    mm: MultiMap,
    t_values,
    z=None,
    n: int = DEFAULT_TREE_DEPTH,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
    rtol: float = 1e-6,
) -> list:
    """Pressure estimates over a grid of t values, sharing one preimage tree."""
    tree = PreimageTree(mm, _default_basepoint(mm, z), cap=cap, rng_seed=rng_seed)
    return [_estimate_on_tree(tree, float(t), n, rtol) for t in t_values]


def poincare_partial(
    mm: MultiMap,
    z,
    t: float,
    N: int,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
) -> float:
    """Truncated Poincare series: sum of S_n(t, z) for n = 1..N.

    The level sums grow when t is below the Bowen parameter and decay above
    it, which is what makes the full series' critical exponent equal delta.
    """
    if N < 1:
        raise ValueError("need at least one level")
    tree = PreimageTree(mm, z, cap=cap, rng_seed=rng_seed)
    return math.fsum(math.exp(tree.log_level_sum(t, n)) for n in range(1, N + 1))


def _hyperbolicity_gate(mm: MultiMap, config: ThermoConfig) -> None:
    report = check_hyperbolic(
        mm,
        depth=config.hyper_depth,
        margin=config.hyper_margin,
        cap=config.hyper_cap,
        rng_seed=config.rng_seed,
    )
    if report.verdict != "pass":
        dist = report.metrics.get("min_distance", float("nan"))
        raise HyperbolicityUnverified(
            f"hyperbolicity check returned '{report.verdict}' (min chordal "
            f"distance {dist:.6g}, margin {report.margin}); pass force=True "
            "to compute anyway"
        )


def bowen_parameter(mm: MultiMap, config: ThermoConfig = None, **overrides) -> BowenResult:
    """Root of t -> P(t) by bracketed bisection on a shared preimage tree.

    Starts from t_lo = 0 where the pressure is log(total degree) >= 0,
    doubles t_hi from 1 until the pressure goes negative, then bisects until
    the bracket is narrower than tol_t and |P| at the midpoint is below
    tol_p.  Unless force is set, a sampled hyperbolicity check must pass
    first.
    """
    config = replace(config or ThermoConfig(), **overrides)
    if not config.force:
        _hyperbolicity_gate(mm, config)
    seed_pt, _ = repelling_seed(mm)
    tree = PreimageTree(mm, seed_pt, cap=config.cap, rng_seed=config.rng_seed)

    def peval(t):
        return _estimate_on_tree(tree, t, config.depth, config.rtol_pressure)

    history = []
    p_lo = peval(0.0)
    history.append((0.0, p_lo.value))
    lo = 0.0
    hi = 1.0
    est_hi = peval(hi)
    history.append((hi, est_hi.value))
    while est_hi.value >= 0.0:
        if hi >= config.t_max:
            raise NoSignChange(
                f"pressure stays nonnegative up to t = {hi}; the system may "
                "not be expanding or the tree depth is too small"
            )
        lo = hi
        hi *= 2.0
        est_hi = peval(hi)
        history.append((hi, est_hi.value))

    iterations = 0
    while True:
        mid = 0.5 * (lo + hi)
        est = peval(mid)
        iterations += 1
        history.append((mid, est.value))
        if est.value >= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= config.tol_t and abs(est.value) <= config.tol_p:
            break
        if iterations > 200:
            raise NonConvergence(
                f"Bowen bisection did not meet tolerances after {iterations} steps"
            )

    # error scale: residual noise divided by the local pressure slope, plus
    # the bracket width itself
    slope = _history_slope(history, mid)
    residual = est.residual if math.isfinite(est.residual) else config.tol_p
    delta_error = residual / max(slope, 1e-12) + (hi - lo)
    return BowenResult(
        delta=float(mid),
        bracket=(float(lo), float(hi)),
        pressure_at_delta=float(est.value),
        iterations=iterations,
        depth=est.depth,
        history=history,
        pressure_residual=float(est.residual),
        delta_error=float(delta_error),
    )


def _history_slope(history, t0: float) -> float:
    """|dP/dt| near t0 from the two closest distinct-t evaluations."""
    pts = sorted(history, key=lambda p: abs(p[0] - t0))
    for ta, pa in pts:
        for tb, pb in pts:
            if abs(ta - tb) > 1e-12:
                return abs((pa - pb) / (ta - tb))
    return 0.0


def lyapunov_and_entropy(
    mm: MultiMap,
    t: float,
    h: float = 1e-3,
    n: int = DEFAULT_TREE_DEPTH,
    z=None,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
) -> SpectrumDiagnostics:
    """Central-difference Lyapunov exponent and equilibrium entropy at t.

    lyapunov = -dP/dt and entropy = P(t) + t * lyapunov; all three pressure
    values come from the same tree at the same fixed depth so the finite
    difference is not polluted by early-stop depth changes.
    """
    tree = PreimageTree(mm, _default_basepoint(mm, z), cap=cap, rng_seed=rng_seed)
    up = _estimate_on_tree(tree, t + h, n, -1.0)
    down = _estimate_on_tree(tree, t - h, n, -1.0)
    mid = _estimate_on_tree(tree, t, n, -1.0)
    lyap = -(up.value - down.value) / (2.0 * h)
    return SpectrumDiagnostics(
        t=float(t),
        lyapunov=float(lyap),
        entropy=float(mid.value + t * lyap),
        pressure=float(mid.value),
        residual=float(mid.residual),
        depth=mid.depth,
    )


def power_map_pressure_oracle(degrees, t: float) -> float:
    """Closed-form pressure log(sum d_j^(1-t)) for pure power maps a_j z^d_j."""
    degs = [int(d) for d in degrees]
    if not degs or any(d < 1 for d in degs) or max(degs) < 2:
        raise ValueError("need degrees >= 1 with at least one >= 2")
    return math.log(math.fsum(float(d) ** (1.0 - t) for d in degs))


def moran_root_oracle(ratios) -> float:
    """Unique t >= 0 with sum r_j^t = 1, bisected to 1e-10.

    A single ratio forces t = 0 (the equation reads r^t = 1).
    """
    rs = [float(r) for r in ratios]
    if not rs or any(not 0.0 < r < 1.0 for r in rs):
        raise ValueError("similarity ratios must lie strictly between 0 and 1")

    def f(t):
        return math.fsum(r**t for r in rs) - 1.0

    if f(0.0) <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise NonConvergence("Moran root bracket search ran away")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
