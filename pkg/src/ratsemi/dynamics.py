"""Multi-generator dynamics: words, skew-product preimages, orbit clouds, checks.

Generators are indexed 1..s.  A word (w1, ..., wn) acts by applying the
generator w1 first, so the composed map is f_{wn} o ... o f_{w1}.  Backward
orbit trees therefore grow by prepending a symbol: a child y of a tree point
y' under generator j satisfies f_j(y) = y' and carries the word (j,) + word'.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import NoRepellingSeed
from .sphere import INF, RationalMap, SpherePoint, sphere_embed

_REPEL_TOL = 1e-6
DEFAULT_DEPTH = 12
DEFAULT_CAP = 200_000


class MultiMap:
    """Finite ordered family of rational-map generators; symbols are 1-based."""

    __slots__ = ("generators",)

    def __init__(self, generators):
        gens = tuple(generators)
        if not gens:
            raise ValueError("need at least one generator")
        for g in gens:
            if not isinstance(g, RationalMap):
                raise TypeError("every generator must be a RationalMap")
        self.generators = gens

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @property
    def degrees(self) -> tuple:
        return tuple(g.degree for g in self.generators)

    @property
    def total_degree(self) -> int:
        return sum(g.degree for g in self.generators)

    def map_for(self, symbol: int) -> RationalMap:
        if not 1 <= symbol <= len(self.generators):
            raise ValueError(
                f"symbol {symbol} out of range 1..{len(self.generators)}"
            )
        return self.generators[symbol - 1]

    def __repr__(self):
        return f"MultiMap(s={self.num_generators}, degrees={self.degrees})"


def word_eval(mm: MultiMap, word, z) -> SpherePoint:
    """Apply the generators named by the word, first symbol first."""
    pt = SpherePoint.of(z)
    for sym in word:
        pt = mm.map_for(sym)(pt)
    return pt


def word_derivative_norm(mm: MultiMap, word, z) -> float:
    """Product of spherical derivative norms along the orbit of z."""
    pt = SpherePoint.of(z)
    acc = 1.0
    for sym in word:
        f = mm.map_for(sym)
        acc *= f.spherical_derivative_norm(pt)
        pt = f(pt)
    return acc


def skew_preimages(mm: MultiMap, z) -> list:
    """All (symbol, y) with f_symbol(y) = z; total_degree entries."""
    out = []
    for j, f in enumerate(mm.generators, start=1):
        out.extend((j, y) for y in f.preimages(z))
    return out


# ---------------------------------------------------------------------------
# deterministic subsampling: stateless splitmix64 counter stream


def _mix64(seed: int, counters: np.ndarray) -> np.ndarray:
    golden = np.uint64(0x9E3779B97F4A7C15)
    x = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + counters.astype(np.uint64) * golden
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _derive_seed(*parts) -> int:
    s = 0x243F6A8885A308D3
    for p in parts:
        s = int(_mix64(s ^ (int(p) & 0xFFFFFFFFFFFFFFFF), np.arange(1, 2, dtype=np.uint64))[0])
    return s


def _bottom_k(seed: int, m: int, k: int) -> np.ndarray:
    """Uniform k-subset of range(m): keep indices of the k smallest keys.

    Nested in k for a fixed seed, so raising the cap only adds points.
    """
    if k >= m:
        return np.arange(m)
    keys = _mix64(seed, np.arange(1, m + 1, dtype=np.uint64))
    order = np.lexsort((np.arange(m), keys))
    return np.sort(order[:k])


def _allocate_largest_remainder(counts: np.ndarray, cap: int) -> np.ndarray:
    """Proportional allocation of cap across strata; ties go to lower index."""
    counts = np.asarray(counts, dtype=np.int64)
    quota = counts * (cap / counts.sum())
    base = np.floor(quota).astype(np.int64)
    frac = quota - base
    rem = cap - int(base.sum())
    order = np.argsort(-frac, kind="stable")
    for idx in order[:rem]:
        base[idx] += 1
    return base


# ---------------------------------------------------------------------------
# cloud levels


@dataclass
class CloudLevel:
    """One depth slice of an orbit cloud.

    words holds symbols outermost-first: column 0 is the symbol applied last
    (adjacent to the root), the final column the symbol applied first.  The
    composition-order word of row i is tuple(words[i, ::-1]).
    """

    z: np.ndarray        # complex chart values; 0 placeholder where inf is set
    inf: np.ndarray      # bool mask for the point at infinity
    words: np.ndarray    # int8, shape (n, depth)
    logd: np.ndarray     # cumulative log word-derivative norm back to the root
    logw: np.ndarray     # log importance weight accumulated by subsampling

    @property
    def size(self) -> int:
        return int(self.z.shape[0])


def _canonical_order(z, inf, words) -> np.ndarray:
    """Sort by word (composition order), then infinity, then re, then im."""
    re = np.where(inf, np.inf, z.real)
    im = np.where(inf, 0.0, z.imag)
    keys = [im, re, inf.astype(np.int8)]
    keys.extend(words[:, k] for k in range(words.shape[1]))
    return np.lexsort(keys)


def _sorted_level(z, inf, words, logd, logw) -> CloudLevel:
    order = _canonical_order(z, inf, words)
    return CloudLevel(z[order], inf[order], words[order], logd[order], logw[order])


def _subsample_level(level: CloudLevel, cap: int, seed: int, tag: int) -> CloudLevel:
    """Stratified by first word symbol; kept entries are reweighted in logw."""
    n = level.size
    if n <= cap:
        return level
    strata = level.words[:, -1]  # first symbol of the composition-order word
    keep_parts = []
    logw = level.logw.copy()
    for sym in np.unique(strata):
        pos = np.flatnonzero(strata == sym)
        keep_parts.append((int(sym), pos))
    counts = np.array([p.size for _, p in keep_parts], dtype=np.int64)
    alloc = _allocate_largest_remainder(counts, cap)
    kept = []
    for (sym, pos), k in zip(keep_parts, alloc):
        if k == 0:
            continue
        sel = pos[_bottom_k(_derive_seed(seed, tag, sym), pos.size, int(k))]
        logw[sel] += math.log(pos.size / k)
        kept.append(sel)
    idx = np.sort(np.concatenate(kept))
    return CloudLevel(
        level.z[idx], level.inf[idx], level.words[idx], level.logd[idx], logw[idx]
    )


def _expand_backward(mm: MultiMap, level: CloudLevel) -> CloudLevel:
    """All skew-product preimages of a level, canonically sorted."""
    fin = ~level.inf
    inf_idx = np.flatnonzero(level.inf)
    zs, infs, logds, logws, words = [], [], [], [], []
    for j, f in enumerate(mm.generators, start=1):
        d = f.degree
        par_z, par_inf = [], []
        par_logd, par_logw, par_words = [], [], []
        if np.any(fin):
            roots, infm = f.preimages_many(level.z[fin])
            par_z.append(roots.ravel())
            par_inf.append(infm.ravel())
            par_logd.append(np.repeat(level.logd[fin], d))
            par_logw.append(np.repeat(level.logw[fin], d))
            par_words.append(np.repeat(level.words[fin], d, axis=0))
        if inf_idx.size:
            pts = f.preimages(INF)
            z1 = np.array([0j if p.is_infinite else p.value for p in pts])
            i1 = np.array([p.is_infinite for p in pts])
            par_z.append(np.tile(z1, inf_idx.size))
            par_inf.append(np.tile(i1, inf_idx.size))
            par_logd.append(np.repeat(level.logd[inf_idx], d))
            par_logw.append(np.repeat(level.logw[inf_idx], d))
            par_words.append(np.repeat(level.words[inf_idx], d, axis=0))
        cz = np.concatenate(par_z)
        cinf = np.concatenate(par_inf)
        norms = f.spherical_derivative_norm_many(cz, cinf)
        with np.errstate(divide="ignore"):
            step = np.log(norms)
        zs.append(cz)
        infs.append(cinf)
        logds.append(np.concatenate(par_logd) + step)
        logws.append(np.concatenate(par_logw))
        w = np.concatenate(par_words) if par_words else np.zeros((0, level.words.shape[1]), dtype=np.int8)
        words.append(
            np.hstack([w, np.full((w.shape[0], 1), j, dtype=np.int8)])
        )
    return _sorted_level(
        np.concatenate(zs),
        np.concatenate(infs),
        np.vstack(words),
        np.concatenate(logds),
        np.concatenate(logws),
    )


@dataclass
class PointCloud:
    """Levelled orbit cloud with word provenance and generation metadata."""

    levels: list
    meta: dict

    @property
    def size(self) -> int:
        return sum(lev.size for lev in self.levels)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def entries(self):
        """Yield (point, word, depth) over every retained entry."""
        for depth, lev in enumerate(self.levels):
            for i in range(lev.size):
                pt = INF if lev.inf[i] else SpherePoint.of(complex(lev.z[i]))
                word = tuple(int(x) for x in lev.words[i, ::-1])
                yield pt, word, depth

    def flat_arrays(self):
        """Concatenated (z, inf, depth) arrays across all levels."""
        z = np.concatenate([lev.z for lev in self.levels])
        inf = np.concatenate([lev.inf for lev in self.levels])
        depth = np.concatenate(
            [np.full(lev.size, d, dtype=np.int64) for d, lev in enumerate(self.levels)]
        )
        return z, inf, depth

    def finite_points(self):
        """Finite-chart values with their depths (rendering, box counting)."""
        z, inf, depth = self.flat_arrays()
        return z[~inf], depth[~inf]


def repelling_seed(mm: MultiMap):
    """Deterministic backward-orbit seed: a repelling generator fixed point.

    Scans generators in index order and takes the first one owning a fixed
    point with multiplier norm > 1 + 1e-6, preferring the largest norm (ties
    resolve to the canonically first point).
    """
    for j, f in enumerate(mm.generators, start=1):
        best = None
        for p, norm in f.fixed_points():
            if norm > 1.0 + _REPEL_TOL and (best is None or norm > best[1]):
                best = (p, norm)
        if best is not None:
            return best[0], j
    raise NoRepellingSeed(
        "no generator has a fixed point with multiplier norm > 1 + 1e-6"
    )


def _root_level(point: SpherePoint) -> CloudLevel:
    isinf = point.is_infinite
    return CloudLevel(
        z=np.array([0j if isinf else point.value]),
        inf=np.array([isinf]),
        words=np.zeros((1, 0), dtype=np.int8),
        logd=np.zeros(1),
        logw=np.zeros(1),
    )


def julia_backward_cloud(
    mm: MultiMap,
    depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
) -> PointCloud:
    """Backward-orbit tree of a repelling seed, one capped level per depth."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if cap < 1:
        raise ValueError("cap must be positive")
    seed_pt, seed_sym = repelling_seed(mm)
    levels = [_root_level(seed_pt)]
    for n in range(1, depth + 1):
        nxt = _expand_backward(mm, levels[-1])
        levels.append(_subsample_level(nxt, cap, rng_seed, n))
    meta = {
        "kind": "backward",
        "seed_point": seed_pt,
        "seed_generator": seed_sym,
        "depth": depth,
        "cap": cap,
        "rng_seed": rng_seed,
        "num_generators": mm.num_generators,
        "degrees": mm.degrees,
    }
    return PointCloud(levels, meta)


# ---------------------------------------------------------------------------
# forward (postcritical) cloud


def _dedupe_level(level: CloudLevel) -> CloudLevel:
    """Collapse entries with identical rounded coordinates; keep the first."""
    re = np.where(level.inf, 0.0, np.round(level.z.real, 9))
    im = np.where(level.inf, 0.0, np.round(level.z.imag, 9))
    flag = level.inf.astype(np.int8)
    keys = [level.words[:, k] for k in range(level.words.shape[1])]
    order = np.lexsort(keys + [im, re, flag])
    re, im, flag = re[order], im[order], flag[order]
    first = np.ones(order.size, dtype=bool)
    if order.size > 1:
        same = (flag[1:] == flag[:-1]) & (re[1:] == re[:-1]) & (im[1:] == im[:-1])
        first[1:] = ~same
    idx = order[first]
    return _sorted_level(
        level.z[idx], level.inf[idx], level.words[idx], level.logd[idx], level.logw[idx]
    )


def _expand_forward(mm: MultiMap, level: CloudLevel) -> CloudLevel:
    """Images of a level under every generator (words grow by appending)."""
    fin = ~level.inf
    inf_idx = np.flatnonzero(level.inf)
    zs, infs, logws, words = [], [], [], []
    for j, f in enumerate(mm.generators, start=1):
        blocks_z, blocks_inf, blocks_w = [], [], []
        if np.any(fin):
            vals, infm = f.eval_many(level.z[fin])
            blocks_z.append(vals)
            blocks_inf.append(infm)
            blocks_w.append(level.words[fin])
        if inf_idx.size:
            img = f(INF)
            blocks_z.append(np.full(inf_idx.size, 0j if img.is_infinite else img.value))
            blocks_inf.append(np.full(inf_idx.size, img.is_infinite))
            blocks_w.append(level.words[inf_idx])
        cz = np.concatenate(blocks_z)
        zs.append(cz)
        infs.append(np.concatenate(blocks_inf))
        logws.append(np.zeros(cz.size))
        w = np.vstack(blocks_w)
        words.append(np.hstack([w, np.full((w.shape[0], 1), j, dtype=np.int8)]))
    return _sorted_level(
        np.concatenate(zs),
        np.concatenate(infs),
        np.vstack(words),
        np.zeros(sum(a.size for a in zs)),
        np.concatenate(logws),
    )


def postcritical_cloud(
    mm: MultiMap,
    depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
) -> PointCloud:
    """Forward orbit of all critical values under all words up to depth.

    Level 0 is the deduplicated set of critical values themselves (identity
    word); level n applies every generator to level n-1 and deduplicates.
    Maps without critical points (degree one) contribute nothing, so the
    cloud may be empty.
    """
    crit = []
    for f in mm.generators:
        crit.extend(f.critical_values())
    z = np.array([0j if p.is_infinite else p.value for p in crit], dtype=complex)
    inf = np.array([p.is_infinite for p in crit], dtype=bool)
    lvl = _dedupe_level(
        CloudLevel(
            z=z,
            inf=inf,
            words=np.zeros((len(crit), 0), dtype=np.int8),
            logd=np.zeros(len(crit)),
            logw=np.zeros(len(crit)),
        )
    )
    levels = [lvl]
    for n in range(1, depth + 1):
        if levels[-1].size == 0:
            levels.append(levels[-1])
            continue
        nxt = _dedupe_level(_expand_forward(mm, levels[-1]))
        levels.append(_subsample_level(nxt, cap, _derive_seed(rng_seed, 0xF0), n))
    meta = {
        "kind": "forward",
        "seed_point": None,
        "depth": depth,
        "cap": cap,
        "rng_seed": rng_seed,
        "num_generators": mm.num_generators,
        "degrees": mm.degrees,
    }
    return PointCloud(levels, meta)


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class VerificationReport:
    """Sampled check outcome: pass / fail / inconclusive plus evidence."""

    verdict: str
    witnesses: list
    margin: float
    parameters: dict
    metrics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _fmt_point(pt: SpherePoint) -> str:
    return "inf" if pt.is_infinite else format(pt.value, ".9g")


def check_hyperbolic(
    mm: MultiMap,
    depth: int = 8,
    margin: float = 0.05,
    cap: int = DEFAULT_CAP,
    rng_seed: int = 0,
) -> VerificationReport:
    """Sampled separation of the postcritical cloud from the Julia cloud.

    pass when the minimum chordal distance is at least margin, fail below
    margin/2 (with the closest pair as witness), inconclusive between.  An
    empty postcritical cloud passes vacuously.  A pass certifies only that
    no violation was found at this sampling resolution.
    """
    params = {"depth": depth, "margin": margin, "cap": cap, "rng_seed": rng_seed}
    post = postcritical_cloud(mm, depth=depth, cap=cap, rng_seed=rng_seed)
    if post.size == 0:
        return VerificationReport(
            verdict="pass",
            witnesses=[],
            margin=margin,
            parameters=params,
            metrics={"min_distance": math.inf, "postcritical_size": 0},
        )
    cloud = julia_backward_cloud(mm, depth=depth, cap=cap, rng_seed=rng_seed)
    jz, jinf, _ = cloud.flat_arrays()
    pz, pinf, _ = post.flat_arrays()
    tree = cKDTree(sphere_embed(jz, jinf))
    dist, idx = tree.query(sphere_embed(pz, pinf))
    k = int(np.argmin(dist))
    min_dist = float(dist[k])
    p_pt = INF if pinf[k] else SpherePoint.of(complex(pz[k]))
    j_pt = INF if jinf[int(idx[k])] else SpherePoint.of(complex(jz[int(idx[k])]))
    metrics = {
        "min_distance": min_dist,
        "postcritical_size": post.size,
        "julia_size": cloud.size,
    }
    witness = [
        (
            p_pt,
            f"postcritical point at chordal distance {min_dist:.6g} from "
            f"backward-orbit point {_fmt_point(j_pt)}",
        )
    ]
    if min_dist >= margin:
        return VerificationReport("pass", [], margin, params, metrics)
    if min_dist < margin / 2.0:
        return VerificationReport("fail", witness, margin, params, metrics)
    return VerificationReport("inconclusive", witness, margin, params, metrics)


def check_expanding_growth(
    mm: MultiMap, cloud: PointCloud, threshold: float = 3.0
) -> VerificationReport:
    """Growth trend of the per-depth minimum word-derivative norm.

    Uses the cumulative norms carried by the backward tree: m_n is the
    minimum over level-n entries of the word derivative norm back to the
    seed.  pass once some depth reaches the threshold with a positive
    geometric trend afterwards; fail when the minima collapse toward zero.
    """
    if cloud.meta.get("kind") != "backward":
        raise ValueError("expanding-growth check needs a backward-orbit cloud")
    params = {"threshold": threshold, "depth": cloud.depth}
    depths = [n for n in range(1, cloud.depth + 1) if cloud.levels[n].size > 0]
    if not depths:
        return VerificationReport(
            "inconclusive", [], threshold, params, {"min_norms": {}}
        )
    mins = {n: float(np.exp(cloud.levels[n].logd.min())) for n in depths}
    metrics = {"min_norms": mins}
    logm = np.log(np.maximum([mins[n] for n in depths], 1e-300))
    ns = np.array(depths, dtype=float)
    slope = float(np.polyfit(ns, logm, 1)[0]) if len(depths) > 1 else 0.0
    metrics["trend_slope"] = slope
    last = depths[-1]
    hit = next((n for n in depths if mins[n] >= threshold), None)
    if hit is not None:
        if hit == last:
            return VerificationReport("pass", [], threshold, params, metrics)
        tail_ns = np.array([n for n in depths if n >= hit], dtype=float)
        tail = np.log(np.maximum([mins[n] for n in depths if n >= hit], 1e-300))
        tail_slope = float(np.polyfit(tail_ns, tail, 1)[0])
        metrics["tail_slope"] = tail_slope
        if tail_slope > 0.0:
            return VerificationReport("pass", [], threshold, params, metrics)
    if slope < 0.0 and mins[last] < 1.0:
        lev = cloud.levels[last]
        i = int(np.argmin(lev.logd))
        pt = INF if lev.inf[i] else SpherePoint.of(complex(lev.z[i]))
        word = tuple(int(x) for x in lev.words[i, ::-1])
        witness = [
            (
                pt,
                f"word {word} has derivative norm {math.exp(float(lev.logd[i])):.3e} "
                f"at depth {last}",
            )
        ]
        return VerificationReport("fail", witness, threshold, params, metrics)
    return VerificationReport("inconclusive", [], threshold, params, metrics)
