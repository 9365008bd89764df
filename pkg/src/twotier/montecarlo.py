"""Ground-truth spatial simulator for uplink SIR outage.

Per trial the full two-tier network is realised inside a window of
``window_factor * Rc`` (matching the analytic lattice truncation; tier-2
BS parents get an extra guard band of one cell radius so edge clusters
are complete), the received interference at the typical BS is summed
term by term, and the outage event ``signal < T * interference`` is
recorded.  Every interferer contributes
``P * (d_serving / d_victim)^gamma * g * h`` with g the log-normal
shadowing ratio (degenerate at 1 when the serving BS is the victim) and
h unit-mean exponential fading; power control makes the typical link's
received power exactly its target.

Trials own independent Philox streams keyed by (seed, trial index), so
estimates are reproducible bit for bit and invariant to how trials are
partitioned across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    HexLattice,
    PointPattern,
    in_exclusion_many,
    lattice_centers,
    nearest_center,
    sample_uniform_disk,
    sample_uniform_hexagon,
    trial_rng,
)
from .model import NetworkConfig
from .analytic import TypicalQuery


@dataclass(frozen=True)
class OutageEstimate:
    probability: float
    trials: int
    ci95_halfwidth: float

    @staticmethod
    def from_events(events: int, trials: int) -> "OutageEstimate":
        p = events / trials
        half = 1.96 * math.sqrt(p * (1.0 - p) / trials)
        return OutageEstimate(p, trials, half)

    def agrees_with(self, value: float, slack: float = 0.0) -> bool:
        return abs(value - self.probability) <= self.ci95_halfwidth + slack


@dataclass(frozen=True)
class CorrelationSpec:
    """Index-kernel location correlation: L_ij = exp(-alpha |i-j|^2)."""

    target: str            # "tier1_ues" | "tier2_bss"
    alpha: float

    TARGETS = ("tier1_ues", "tier2_bss")

    def __post_init__(self):
        if self.target not in self.TARGETS:
            raise ValueError(f"unknown correlation target {self.target!r}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


@dataclass
class Realization:
    """One network draw, organised per point process."""

    tier1_ues: list            # per type: PointPattern (absolute positions)
    tier1_serving: list        # per type: (n,2) serving macro BS per UE
    tier2_bss: list            # per BS type: PointPattern
    tier2_ues: list            # [type][class]: PointPattern (absolute)
    tier2_parents: list        # [type][class]: (n,2) parent BS per UE
    typical_position: np.ndarray | None   # x_U (tier-1) / macro anchor x_B (tier-2)
    typical_cell_ues: list = field(default_factory=list)   # tier-2 query: per class
    typical_cell_masks: list = field(default_factory=list)


_sqrt_cov_cache: dict = {}


def _correlation_mixing(n: int, alpha: float) -> np.ndarray:
    """Symmetric K with K^T K = L, L_ij = exp(-alpha |i-j|^2)."""
    key = (n, float(alpha))
    hit = _sqrt_cov_cache.get(key)
    if hit is not None:
        return hit
    idx = np.arange(n)
    L = np.exp(-alpha * (idx[:, None] - idx[None, :]) ** 2)
    vals, vecs = np.linalg.eigh(L)
    if np.any(vals < -1e-8):
        raise np.linalg.LinAlgError("covariance factorization failed")
    K = (vecs * np.sqrt(np.clip(vals, 1e-12, None))) @ vecs.T
    if len(_sqrt_cov_cache) < 4096:
        _sqrt_cov_cache[key] = K
    return K


def correlate_points(pattern: PointPattern, spec: CorrelationSpec) -> PointPattern:
    """Mix point coordinates in generation order so the stacked coordinate
    vectors acquire covariance L; the transform is deterministic."""
    n = len(pattern)
    if n == 0:
        raise ValueError("cannot correlate an empty pattern")
    if n == 1:
        return pattern
    K = _correlation_mixing(n, spec.alpha)
    return PointPattern(K.T @ pattern.points, pattern.type_index, pattern.marks)


# --------------------------------------------------------------------------
# realisation

class _SimContext:
    """Per-(config, query) precomputation shared by all trials."""

    def __init__(self, config: NetworkConfig, query: TypicalQuery,
                 window_factor: float, correlation: CorrelationSpec | None):
        query.check(config)
        if config.exclusion.mode != "none" and correlation is not None:
            raise ValueError("correlated sampling with exclusion regions "
                             "is not supported")
        self.cfg = config
        self.query = query
        self.corr = correlation
        rc = config.hex_radius
        self.rc = rc
        self.gamma = config.channel.pathloss_exponent
        self.sigma_ln = config.channel.sigma_ln
        self.cap = window_factor * rc
        self.hex_area = 3.0 * math.sqrt(3.0) / 2.0 * rc * rc
        base = lattice_centers(HexLattice(rc), self.cap)
        self.cells_all = base
        keep = np.hypot(base[:, 0], base[:, 1]) > 1e-12 * rc
        self.cells_out = base[keep]
        self.base_margin = lattice_centers(HexLattice(rc), self.cap + rc)


def _draw_tier1_patterns(ctx: _SimContext, rng, anchor: np.ndarray | None):
    """Tier-1 UE patterns per type.

    anchor None: tier-1 view (lattice at the origin; origin cell included).
    anchor x_B: tier-2 view (lattice shifted by x_B, capped at |c|<=cap).
    """
    cfg = ctx.cfg
    if anchor is None:
        cells = ctx.cells_all
        offset = (0.0, 0.0)
    else:
        shifted = ctx.base_margin + anchor
        cells = shifted[np.hypot(shifted[:, 0], shifted[:, 1]) <= ctx.cap]
        offset = tuple(anchor)
    patterns, servings = [], []
    correlated = ctx.corr is not None and ctx.corr.target == "tier1_ues"
    for i, t1 in enumerate(cfg.tier1):
        if correlated:
            # generation order must carry no spatial information, otherwise
            # the index-local mixing just pulls UEs toward their own serving
            # BS: draw the whole type as one process over the cell union
            total = int(rng.poisson(t1.intensity * ctx.hex_area * len(cells)))
            rel = sample_uniform_hexagon((0.0, 0.0), ctx.rc, total, rng)
            centers = cells[rng.integers(0, len(cells), total)]
            pts = rel + centers
            if total:
                pts = correlate_points(PointPattern(pts, i), ctx.corr).points
                centers = nearest_center(HexLattice(ctx.rc, offset), pts)
        else:
            counts = rng.poisson(t1.intensity * ctx.hex_area, size=len(cells))
            total = int(counts.sum())
            rel = sample_uniform_hexagon((0.0, 0.0), ctx.rc, total, rng)
            centers = np.repeat(cells, counts, axis=0)
            pts = rel + centers
        patterns.append(PointPattern(pts, i))
        servings.append(centers)
    return patterns, servings


def _draw_daughters(profile, parents: np.ndarray, rng):
    """Thinned inhomogeneous daughters for every parent BS at once."""
    nu_max = profile.max_density
    R = profile.support_radius
    if nu_max <= 0 or len(parents) == 0:
        return np.empty((0, 2)), np.empty((0, 2))
    counts = rng.poisson(nu_max * math.pi * R * R, size=len(parents))
    total = int(counts.sum())
    rel = sample_uniform_disk((0.0, 0.0), R, total, rng)
    if total:
        keep = rng.random(total) * nu_max <= np.asarray(
            profile.density(np.hypot(rel[:, 0], rel[:, 1])))
        rel = rel[keep]
        parent_pos = np.repeat(parents, counts, axis=0)[keep]
    else:
        parent_pos = np.empty((0, 2))
    return rel, parent_pos


def realize(config: NetworkConfig, query: TypicalQuery, rng,
            window_factor: float = 10.0,
            correlation: CorrelationSpec | None = None,
            _ctx: _SimContext | None = None) -> Realization:
    """Draw one full network realisation for the given typical entity."""
    ctx = _ctx or _SimContext(config, query, window_factor, correlation)
    cfg = ctx.cfg
    ex = cfg.exclusion

    if query.tier == 1:
        anchor = None
        typical = sample_uniform_hexagon((0.0, 0.0), ctx.rc, 1, rng)[0]  # x_U
        lattice = HexLattice(ctx.rc)
    else:
        typical = sample_uniform_hexagon((0.0, 0.0), ctx.rc, 1, rng)[0]  # x_B
        if ex.mode == "bs":
            # the typical tier-2 BS itself must respect the exclusion
            while np.hypot(*typical) <= ex.radius:
                typical = sample_uniform_hexagon((0.0, 0.0), ctx.rc, 1, rng)[0]
        anchor = typical
        lattice = HexLattice(ctx.rc, tuple(anchor))

    t1_patterns, t1_serving = _draw_tier1_patterns(ctx, rng, anchor)

    bs_patterns, ue_patterns, ue_parents = [], [], []
    correlated_bs = ctx.corr is not None and ctx.corr.target == "tier2_bss"
    for i, bs in enumerate(cfg.tier2):
        wr = ctx.cap + bs.radius
        nbs = rng.poisson(bs.intensity * math.pi * wr * wr)
        pos = sample_uniform_disk((0.0, 0.0), wr, nbs, rng)
        if correlated_bs and nbs:
            pos = correlate_points(PointPattern(pos, i), ctx.corr).points
        if ex.mode == "bs" and nbs:
            pos = pos[~in_exclusion_many(pos, lattice, ex)]
        bs_patterns.append(PointPattern(pos, i))
        per_class, per_parent = [], []
        for cls in bs.ue_classes:
            rel, parents = _draw_daughters(cls.profile, pos, rng)
            pts = rel + parents
            if ex.mode == "ue" and len(pts):
                keep = ~in_exclusion_many(pts, lattice, ex)
                pts, parents = pts[keep], parents[keep]
            per_class.append(PointPattern(pts))
            per_parent.append(parents)
        ue_patterns.append(per_class)
        ue_parents.append(per_parent)

    typical_ues: list = []
    if query.tier == 2:
        bs = cfg.tier2[query.bs_type]
        origin = np.zeros((1, 2))
        for cls in bs.ue_classes:
            rel, _ = _draw_daughters(cls.profile, origin, rng)
            if ex.mode == "ue" and len(rel):
                rel = rel[~in_exclusion_many(rel, lattice, ex)]
            typical_ues.append(PointPattern(rel))

    return Realization(
        tier1_ues=t1_patterns,
        tier1_serving=t1_serving,
        tier2_bss=bs_patterns,
        tier2_ues=ue_patterns,
        tier2_parents=ue_parents,
        typical_position=typical,
        typical_cell_ues=typical_ues,
    )


# --------------------------------------------------------------------------
# interference accumulation

def _ratio_gamma(d2_num: np.ndarray, d2_den: np.ndarray, gamma: float) -> np.ndarray:
    r = d2_num / d2_den
    if gamma == 4.0:
        return r * r
    return r ** (0.5 * gamma)


def _trial_shared(ctx: _SimContext, rng) -> bool:
    cfg = ctx.cfg
    q = ctx.query
    real = realize(cfg, q, rng, _ctx=ctx)
    gamma = ctx.gamma
    h_sig = rng.exponential()
    if q.tier == 1:
        signal = cfg.tier1[q.ue_type].target_power * h_sig
    else:
        signal = cfg.tier2[q.bs_type].ue_classes[q.ue_class].target_power * h_sig

    interference = 0.0
    for i, t1 in enumerate(cfg.tier1):
        pts = real.tier1_ues[i].points
        if not len(pts):
            continue
        serv = real.tier1_serving[i]
        d2_serv = (pts[:, 0] - serv[:, 0]) ** 2 + (pts[:, 1] - serv[:, 1]) ** 2
        d2_vict = pts[:, 0] ** 2 + pts[:, 1] ** 2
        own_cell = (serv[:, 0] == 0.0) & (serv[:, 1] == 0.0)
        g = np.exp(ctx.sigma_ln * rng.standard_normal(len(pts)))
        g[own_cell] = 1.0      # same link toward serving and victim BS
        h = rng.exponential(size=len(pts))
        ratio = _ratio_gamma(d2_serv, d2_vict, gamma)
        ratio[own_cell] = 1.0  # power-controlled to the victim itself
        if cfg.drop_tier1_intracell:
            ratio = np.where(own_cell, 0.0, ratio)
        interference += t1.target_power * float((ratio * g * h).sum())

    for i, bs in enumerate(cfg.tier2):
        for j, cls in enumerate(bs.ue_classes):
            pts = real.tier2_ues[i][j].points
            if not len(pts):
                continue
            parents = real.tier2_parents[i][j]
            d2_serv = (pts[:, 0] - parents[:, 0]) ** 2 + (pts[:, 1] - parents[:, 1]) ** 2
            d2_vict = pts[:, 0] ** 2 + pts[:, 1] ** 2
            g = np.exp(ctx.sigma_ln * rng.standard_normal(len(pts)))
            h = rng.exponential(size=len(pts))
            interference += cls.target_power * float(
                (_ratio_gamma(d2_serv, d2_vict, gamma) * g * h).sum())

    if q.tier == 2 and not cfg.drop_tier2_intracell:
        for j, cls in enumerate(cfg.tier2[q.bs_type].ue_classes):
            pts = real.typical_cell_ues[j].points
            n = len(pts)
            if not n:
                continue
            # co-cell UEs are power controlled to the victim: plain fading
            interference += cls.target_power * float(rng.exponential(size=n).sum())

    return signal < q.sir_threshold * interference


# --------------------------------------------------------------------------
# orthogonal access (dependent thinning)

def _sample_profile_positions(profile, m: int, rng) -> np.ndarray:
    """m independent draws from the normalised profile density."""
    out = np.empty((m, 2))
    pending = np.arange(m)
    nu_max = profile.max_density
    R = profile.support_radius
    while pending.size:
        cand = sample_uniform_disk((0.0, 0.0), R, pending.size, rng)
        acc = rng.random(pending.size) * nu_max <= np.asarray(
            profile.density(np.hypot(cand[:, 0], cand[:, 1])))
        out[pending[acc]] = cand[acc]
        pending = pending[~acc]
    return out


def _coblock_tier1(ctx: _SimContext, rng, cells: np.ndarray, n_blocks: int):
    """Per macro cell, at most one co-block tier-1 interferer.

    A cell with m UEs schedules min(m, n) of them on distinct blocks; the
    probability that the typical block is used is min(m, n)/n and the UE
    on it is uniform over the cell's UEs.
    """
    cfg = ctx.cfg
    M = len(cfg.tier1)
    counts = np.stack([
        rng.poisson(t1.intensity * ctx.hex_area, size=len(cells))
        for t1 in cfg.tier1
    ]) if M else np.zeros((0, len(cells)), dtype=int)
    m = counts.sum(axis=0)
    active = rng.random(len(cells)) * n_blocks < np.minimum(m, n_blocks)
    active &= m > 0
    idx = np.nonzero(active)[0]
    if not idx.size:
        return np.empty((0, 2)), np.empty((0, 2)), np.empty(0, dtype=int)
    cum = np.cumsum(counts[:, idx], axis=0)
    pick = rng.random(idx.size) * m[idx]
    type_idx = (pick[None, :] >= cum).sum(axis=0)
    rel = sample_uniform_hexagon((0.0, 0.0), ctx.rc, idx.size, rng)
    centers = cells[idx]
    return rel + centers, centers, type_idx


def _trial_orthogonal(ctx: _SimContext, rng) -> bool:
    cfg = ctx.cfg
    q = ctx.query
    n_blocks = cfg.access.blocks
    gamma = ctx.gamma
    h_sig = rng.exponential()

    if q.tier == 1:
        anchor = None
        cells = ctx.cells_out          # typical cell never co-blocks
        signal = cfg.tier1[q.ue_type].target_power * h_sig
    else:
        x_b = sample_uniform_hexagon((0.0, 0.0), ctx.rc, 1, rng)[0]
        anchor = x_b
        shifted = ctx.base_margin + anchor
        cells = shifted[np.hypot(shifted[:, 0], shifted[:, 1]) <= ctx.cap]
        signal = cfg.tier2[q.bs_type].ue_classes[q.ue_class].target_power * h_sig

    interference = 0.0
    pts, centers, type_idx = _coblock_tier1(ctx, rng, cells, n_blocks)
    if len(pts):
        d2_serv = (pts[:, 0] - centers[:, 0]) ** 2 + (pts[:, 1] - centers[:, 1]) ** 2
        d2_vict = pts[:, 0] ** 2 + pts[:, 1] ** 2
        g = np.exp(ctx.sigma_ln * rng.standard_normal(len(pts)))
        h = rng.exponential(size=len(pts))
        powers = np.array([t.target_power for t in cfg.tier1])[type_idx]
        interference += float(
            (powers * _ratio_gamma(d2_serv, d2_vict, gamma) * g * h).sum())

    for i, bs in enumerate(cfg.tier2):
        wr = ctx.cap + bs.radius
        nbs = rng.poisson(bs.intensity * math.pi * wr * wr)
        if not nbs:
            continue
        pos = sample_uniform_disk((0.0, 0.0), wr, nbs, rng)
        K = len(bs.ue_classes)
        counts = np.stack([
            rng.poisson(mean, size=nbs)
            for mean in (cls.profile.mean_count() for cls in bs.ue_classes)
        ]) if K else np.zeros((0, nbs), dtype=int)
        m = counts.sum(axis=0)
        active = rng.random(nbs) * n_blocks < np.minimum(m, n_blocks)
        active &= m > 0
        idx = np.nonzero(active)[0]
        if not idx.size:
            continue
        cum = np.cumsum(counts[:, idx], axis=0)
        pick = rng.random(idx.size) * m[idx]
        cls_idx = (pick[None, :] >= cum).sum(axis=0)
        for j, cls in enumerate(bs.ue_classes):
            sel = np.nonzero(cls_idx == j)[0]
            if not sel.size:
                continue
            rel = _sample_profile_positions(cls.profile, sel.size, rng)
            parent = pos[idx[sel]]
            pts2 = rel + parent
            d2_serv = rel[:, 0] ** 2 + rel[:, 1] ** 2
            d2_vict = pts2[:, 0] ** 2 + pts2[:, 1] ** 2
            g = np.exp(ctx.sigma_ln * rng.standard_normal(sel.size))
            h = rng.exponential(size=sel.size)
            interference += cls.target_power * float(
                (_ratio_gamma(d2_serv, d2_vict, gamma) * g * h).sum())

    # intra-cell co-block interference is structurally zero at both tiers
    return signal < q.sir_threshold * interference


# --------------------------------------------------------------------------
# public estimation API

def _count_events(config, query, seed, start, stop, window_factor,
                  correlation, trial_fn) -> int:
    ctx = _SimContext(config, query, window_factor, correlation)
    events = 0
    for t in range(start, stop):
        events += trial_fn(ctx, trial_rng(seed, t))
    return events


def simulate_events(config: NetworkConfig, query: TypicalQuery, seed: int,
                    start: int, stop: int, window_factor: float = 10.0,
                    correlation: CorrelationSpec | None = None) -> int:
    """Outage-event count over the trial-index slice [start, stop).

    Because trial t always uses the stream keyed by (seed, t), workers may
    split the index space arbitrarily and sum the counts without changing
    the estimate.
    """
    if config.access.mode == "orthogonal":
        if config.exclusion.mode != "none":
            raise ValueError("orthogonal simulation with exclusion regions "
                             "is not supported")
        if correlation is not None:
            raise ValueError("orthogonal simulation with correlated "
                             "locations is not supported")
        return _count_events(config, query, seed, start, stop, window_factor,
                             None, _trial_orthogonal)
    return _count_events(config, query, seed, start, stop, window_factor,
                         correlation, _trial_shared)


def simulate_outage(config: NetworkConfig, query: TypicalQuery, trials: int,
                    seed: int, window_factor: float = 10.0,
                    correlation: CorrelationSpec | None = None) -> OutageEstimate:
    """Shared-channel outage estimate over independent seeded trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if config.access.mode != "shared":
        raise ValueError("simulate_outage covers the shared channel; use "
                         "simulate_orthogonal for orthogonal access")
    events = _count_events(config, query, seed, 0, trials, window_factor,
                           correlation, _trial_shared)
    return OutageEstimate.from_events(events, trials)


def simulate_orthogonal(config: NetworkConfig, query: TypicalQuery, trials: int,
                        seed: int, window_factor: float = 10.0) -> OutageEstimate:
    """Dependent-thinning simulation of orthogonal multiple access."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if config.access.mode != "orthogonal":
        raise ValueError("config does not use orthogonal access")
    if config.exclusion.mode != "none":
        raise ValueError("orthogonal simulation with exclusion regions "
                         "is not supported")
    events = _count_events(config, query, seed, 0, trials, window_factor,
                           None, _trial_orthogonal)
    return OutageEstimate.from_events(events, trials)


@dataclass(frozen=True)
class GapRow:
    alpha: float
    relaxed_targets: tuple
    utility: float
    eta: float


def estimate_relative_gap(config: NetworkConfig, utilities, targets_tier1,
                          alpha_grid, trials: int, seed: int,
                          sir_threshold: float,
                          correlation_target: str = "tier2_bss",
                          spec=None) -> list[GapRow]:
    """Robustness protocol for the planning optimum under correlated
    locations: solve the uncorrelated problem, simulate the relaxed outage
    at the optimum under each correlation level, re-solve with the relaxed
    targets, and report the relative utility gap eta."""
    from .planner import build_tradeoff, solve
    from .quadrature import DEFAULT_SPEC

    spec = spec or DEFAULT_SPEC
    system = build_tradeoff(config, sir_threshold, targets_tier1, None, spec)
    base = solve(system, utilities)
    mu_star = base.mu
    tier2 = tuple(replace(bs, intensity=float(m))
                  for bs, m in zip(config.tier2, mu_star))
    cfg_star = config.with_(tier2=tier2)

    rows = []
    for a, alpha in enumerate(alpha_grid):
        corr = CorrelationSpec(correlation_target, float(alpha))
        relaxed = []
        for j in range(len(config.tier1)):
            est = simulate_outage(cfg_star, TypicalQuery.tier1(j, sir_threshold),
                                  trials, seed, correlation=corr)
            relaxed.append(max(est.probability, targets_tier1[j]))
        relaxed_system = build_tradeoff(config, sir_threshold, relaxed, None, spec)
        res = solve(relaxed_system, utilities)
        eta = (res.utility - base.utility) / res.utility
        rows.append(GapRow(float(alpha), tuple(relaxed), res.utility, eta))
    return rows
