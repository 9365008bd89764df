"""Interference Laplace transforms and outage probabilities.

Every transform reduces to integrals of the shadowing kernel
``t -> E_g[t g/(t g + 1)]`` over cells, disks, and the plane:

  * tier-1 in-cell interference has the closed form
    ``exp(-lam * |H| * sP/(sP+1))`` (in-cell interferers are power
    controlled to the victim BS, so no pathloss or shadowing survives),
  * tier-1 out-of-cell interference sums per-cell hexagon integrals over
    the lattice (capped at ``lattice_cap_factor * Rc``),
  * each tier-2 cell aggregates into a single emission point; the parent
    process then contributes ``exp(-mu_i * C_i(s))`` where ``C_i`` is the
    plane integral of one minus the per-cell transform,
  * intra-cell tier-2 interference is a closed form in the profile mass.

Profiles are radially symmetric, so without exclusion regions the
per-cell transform depends only on the distance of the cell to the
receiver and ``C_i`` collapses to a 1-D radial integral.  Exclusion
regions break the symmetry only inside disks around lattice centers;
they are handled as per-disk corrections (exact while no cell can reach
two exclusion disks, i.e. ``2*(R_i + R_e) <= sqrt(3)*Rc``).

Heavy intermediates are memoised at module level keyed by the primitive
quantities they depend on (never by whole configs), so intensity sweeps
reuse all geometry-dependent work.  Caches are ``lru_cache``-based and
safe for concurrent readers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .geometry import HEX_AREA_FACTOR, HexLattice, lattice_centers
from .model import IntensityProfile, NetworkConfig, mean_ue_per_cell
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    TruncationError,
    gl_panel,
    hexagon_nodes,
    shadowed_saturation,
    _unit_disk_nodes,
)


@dataclass(frozen=True)
class InterferenceLaplace:
    """Evaluator s -> E[exp(-s I)] for one interference component."""

    tag: str
    fn: Callable[[float], float]

    def __call__(self, s: float) -> float:
        return self.fn(float(s))


@dataclass(frozen=True)
class TypicalQuery:
    tier: int
    sir_threshold: float
    ue_type: int = 0    # tier-1 type index k
    bs_type: int = 0    # tier-2 serving type l
    ue_class: int = 0   # tier-2 querying class k

    @staticmethod
    def tier1(ue_type: int, sir_threshold: float) -> "TypicalQuery":
        return TypicalQuery(1, sir_threshold, ue_type=ue_type)

    @staticmethod
    def tier2(bs_type: int, ue_class: int, sir_threshold: float) -> "TypicalQuery":
        return TypicalQuery(2, sir_threshold, bs_type=bs_type, ue_class=ue_class)

    def check(self, config: NetworkConfig) -> None:
        if self.sir_threshold <= 0:
            raise ValueError("sir_threshold must be positive")
        if self.tier == 1:
            if not 0 <= self.ue_type < len(config.tier1):
                raise IndexError(f"tier-1 type {self.ue_type} out of range")
        elif self.tier == 2:
            if not 0 <= self.bs_type < len(config.tier2):
                raise IndexError(f"tier-2 BS type {self.bs_type} out of range")
            if not 0 <= self.ue_class < len(config.tier2[self.bs_type].ue_classes):
                raise IndexError(f"tier-2 class {self.ue_class} out of range")
        else:
            raise ValueError("tier must be 1 or 2")


# --------------------------------------------------------------------------
# cache keys built from primitives (configs themselves are never keys)

def _geom_key(config: NetworkConfig, spec: QuadratureSpec):
    return (config.hex_radius, config.channel.pathloss_exponent,
            config.channel.shadow_sigma_db, spec)


def _cell_key(config: NetworkConfig, i: int, spec: QuadratureSpec):
    bs = config.tier2[i]
    classes = tuple((c.target_power, c.profile) for c in bs.ue_classes)
    return (config.hex_radius, config.channel.pathloss_exponent,
            config.channel.shadow_sigma_db, spec, bs.radius, classes)


def _pow_gamma(d2: np.ndarray, gamma: float) -> np.ndarray:
    if gamma == 4.0:
        return d2 * d2
    return d2 ** (0.5 * gamma)


# --------------------------------------------------------------------------
# tier-1 out-of-cell machinery: per-cell hexagon integrals over the lattice

@lru_cache(maxsize=512)
def _hex_cache(rc: float, order: int):
    pts, wts = hexagon_nodes((0.0, 0.0), rc, order)
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    return pts, wts, r2


def _w_cells(centers: np.ndarray, sP: float, rc: float, gamma: float,
             kernel, spec: QuadratureSpec) -> np.ndarray:
    """Exponent contribution of each lattice cell at ``centers`` (victim at 0)."""
    pts, wts, r2 = _hex_cache(rc, spec.hexagon_order)
    rg = _pow_gamma(r2, gamma)
    out = np.empty(len(centers))
    chunk = max(1, int(4e6 // max(len(pts), 1)))
    for lo in range(0, len(centers), chunk):
        c = centers[lo:lo + chunk]
        dx = pts[None, :, 0] + c[:, None, 0]
        dy = pts[None, :, 1] + c[:, None, 1]
        t = sP * rg[None, :] / _pow_gamma(dx * dx + dy * dy, gamma)
        out[lo:lo + chunk] = kernel(t) @ wts
    return out


@lru_cache(maxsize=4096)
def _w_sum_tier1(geom_key, sP: float) -> float:
    """Sum of cell exponents over the lattice minus the origin cell."""
    rc, gamma, sigma_db, spec = geom_key
    if sP == 0.0:
        return 0.0
    kernel = shadowed_saturation(sigma_db, spec)
    cap = spec.lattice_cap_factor * rc
    centers = lattice_centers(HexLattice(rc), cap)
    keep = np.hypot(centers[:, 0], centers[:, 1]) > 1e-12 * rc
    return float(_w_cells(centers[keep], sP, rc, gamma, kernel, spec).sum())


@lru_cache(maxsize=64)
def _base_lattice(rc: float, reach: float):
    return lattice_centers(HexLattice(rc), reach)


@lru_cache(maxsize=256)
def _xb_quadrature(rc: float, spec: QuadratureSpec, mode: str, re1: float):
    """Receiver-placement nodes over H(0), conditioned on BS exclusion.

    Under BS exclusion the typical tier-2 BS (at the origin) cannot lie
    within ``re1`` of its nearest macro BS, so the placement is uniform on
    the hexagon minus the central disk: represented as hexagon nodes plus
    negatively weighted disk nodes.
    """
    pts, wts = hexagon_nodes((0.0, 0.0), rc, spec.xb_order)
    denom = HEX_AREA_FACTOR * rc * rc
    if mode == "bs":
        dpts, dww, _ = _unit_disk_nodes(spec.disk_radial, spec.disk_angular)
        pts = np.concatenate([pts, dpts * re1])
        wts = np.concatenate([wts, -dww * re1 * re1])
        denom -= math.pi * re1 * re1
    return pts, wts, denom


@lru_cache(maxsize=2048)
def _w_sum_xb(geom_key, sP: float, mode: str, re1: float):
    """Per-receiver-node lattice exponent sums for the tier-2 view.

    Returns (xb_pts, xb_wts, denom, S) where S[m] is the summed cell
    exponent for the lattice shifted to the m-th placement node.
    """
    rc, gamma, sigma_db, spec = geom_key
    xb_pts, xb_wts, denom = _xb_quadrature(rc, spec, mode, re1)
    if sP == 0.0:
        return xb_pts, xb_wts, denom, np.zeros(len(xb_pts))
    kernel = shadowed_saturation(sigma_db, spec)
    cap = spec.lattice_cap_factor * rc
    base = _base_lattice(rc, cap + rc)
    shifted = base[None, :, :] + xb_pts[:, None, :]
    dist = np.hypot(shifted[..., 0], shifted[..., 1])
    keep = dist <= cap
    idx = np.repeat(np.arange(len(xb_pts)), keep.sum(axis=1))
    flat = shifted[keep]
    w = _w_cells(flat, sP, rc, gamma, kernel, spec)
    S = np.bincount(idx, weights=w, minlength=len(xb_pts))
    return xb_pts, xb_wts, denom, S


# --------------------------------------------------------------------------
# tier-2 cell transforms: radial profile, plane coefficient, exclusion

@lru_cache(maxsize=512)
def _disk_cache(radius: float, nr: int, na: int, classes, gamma: float):
    pts, ww, rr = _unit_disk_nodes(nr, na)
    pts = pts * radius
    rr = rr * radius
    ww = ww * radius * radius
    rg = _pow_gamma(rr * rr, gamma)
    weighted = tuple(
        (q, ww * np.asarray(profile.density(rr), dtype=float))
        for q, profile in classes
    )
    return pts, rg, weighted


class _RadialCellProfile:
    """Distance-only view of one tier-2 cell type at a fixed s."""

    def __init__(self, cell_key, s: float):
        rc, gamma, sigma_db, spec, radius, classes = cell_key
        self.rc, self.gamma, self.spec = rc, gamma, spec
        self.radius = radius
        self.s = s
        self.kernel = shadowed_saturation(sigma_db, spec)
        self.classes = classes
        self._pts, self._rg, self._weighted = _disk_cache(
            radius, spec.disk_radial, spec.disk_angular, classes, gamma)
        d_max = (spec.lattice_cap_factor + 3.0) * rc + radius
        grid = np.unique(np.concatenate([
            np.linspace(0.0, 4.0 * radius, 96),
            np.geomspace(max(4.0 * radius, 1e-6), d_max, 128),
            [d_max],
        ]))
        self._exp_spline = CubicSpline(grid, self.exponent(grid))
        self.c_sym = self._c_plane()

    def exponent(self, rho) -> np.ndarray:
        """Cell transform exponent at receiver distance rho (vectorised)."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.zeros(len(rho))
        if self.s == 0.0:
            return out
        chunk = max(1, int(4e6 // max(len(self._pts), 1)))
        for lo in range(0, len(rho), chunk):
            r = rho[lo:lo + chunk]
            dx = self._pts[None, :, 0] + r[:, None]
            d2 = dx * dx + self._pts[None, :, 1] ** 2
            dg = _pow_gamma(d2, self.gamma)
            acc = np.zeros(len(r))
            for q, wnu in self._weighted:
                acc += self.kernel(self.s * q * self._rg[None, :] / dg) @ wnu
            out[lo:lo + chunk] = acc
        return out

    def exponent_interp(self, rho):
        return np.maximum(self._exp_spline(rho), 0.0)

    def one_minus_l(self, rho):
        return -np.expm1(-self.exponent_interp(rho))

    def _c_plane(self) -> float:
        """2 pi * integral of (1 - exp(-exponent(rho))) rho drho, adaptive."""
        spec = self.spec
        R, rc = self.radius, self.rc
        start = spec.plane_start_factor * rc
        breaks = sorted({0.0, 0.25 * R, 0.5 * R, R, 2.0 * R, 4.0 * R} |
                        {f * rc for f in (0.5, 1.0, 2.0, 4.0, 8.0)} | {start})
        breaks = [b for b in breaks if b <= start]
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            r, w = gl_panel(a, b, spec.radial_panel_order)
            total += 2.0 * math.pi * float(
                (-np.expm1(-self.exponent(r)) * r) @ w)
        radius = start
        for _ in range(spec.max_doublings):
            r, w = gl_panel(radius, 2.0 * radius, spec.radial_panel_order)
            piece = 2.0 * math.pi * float((-np.expm1(-self.exponent(r)) * r) @ w)
            radius *= 2.0
            prev, total = total, total + piece
            denom = abs(total) if total != 0.0 else 1.0
            if abs(total - prev) <= spec.plane_rel_tol * denom:
                return total
        raise TruncationError(
            f"tier-2 plane coefficient did not settle (radius {radius:g})",
            (prev, total))


@lru_cache(maxsize=2048)
def _radial_profile(cell_key, s: float) -> _RadialCellProfile:
    return _RadialCellProfile(cell_key, s)


def _check_exclusion_geometry(radius: float, re: float, rc: float, mode: str):
    reach = 2.0 * (radius + re) if mode == "ue" else 2.0 * re
    if reach > math.sqrt(3.0) * rc:
        raise NotImplementedError(
            "exclusion radius too large for the per-disk analytic "
            f"decomposition (needs 2*(R_i + R_e) <= sqrt(3)*Rc, got "
            f"{reach:.3f} > {math.sqrt(3.0) * rc:.3f})")


def _lens_removed(prof: _RadialCellProfile, x0: np.ndarray, m: np.ndarray,
                  re: float, nr: int, na: int) -> float:
    """Exponent mass removed from the cell at x0 when UEs inside the disk
    B(m_abs, re) are forbidden; m is the disk center relative to x0."""
    R = prof.radius
    e = float(np.hypot(m[0], m[1]))
    s, gamma, kernel = prof.s, prof.gamma, prof.kernel
    total = 0.0

    def accumulate(r, wr, theta, wt):
        # grids: r (nr,), theta (nr, na) absolute angles
        rr = r[:, None]
        x = rr * np.cos(theta)
        y = rr * np.sin(theta)
        d2 = (x0[0] + x) ** 2 + (x0[1] + y) ** 2
        dg = _pow_gamma(d2, gamma)
        rg = _pow_gamma(rr * rr, gamma)
        acc = np.zeros_like(theta)
        for q, profile in prof.classes:
            nu = np.asarray(profile.density(rr), dtype=float)
            acc += kernel(s * q * rg / dg) * nu
        return float(((acc * wt).sum(axis=1) * wr * r).sum())

    if e < 1e-12:
        r_hi = min(R, re)
        if r_hi > 0:
            r, wr = gl_panel(0.0, r_hi, nr)
            th, wt = gl_panel(0.0, 2.0 * math.pi, na)
            total += accumulate(r, wr, np.broadcast_to(th, (nr, na)).copy(),
                                np.broadcast_to(wt, (nr, na)))
        return total

    theta_m = math.atan2(m[1], m[0])
    if e < re:                                  # full circles up to re - e
        r_hi = min(R, re - e)
        if r_hi > 0:
            r, wr = gl_panel(0.0, r_hi, nr)
            th, wt = gl_panel(0.0, 2.0 * math.pi, na)
            total += accumulate(r, wr, np.broadcast_to(th, (nr, na)).copy(),
                                np.broadcast_to(wt, (nr, na)))
    r_lo, r_hi = max(0.0, abs(e - re)), min(R, e + re)
    if r_hi > r_lo:
        r, wr = gl_panel(r_lo, r_hi, nr)
        cosb = (r * r + e * e - re * re) / (2.0 * r * e)
        beta = np.arccos(np.clip(cosb, -1.0, 1.0))
        xi, wxi = gl_panel(-1.0, 1.0, na)
        theta = theta_m + beta[:, None] * xi[None, :]
        wt = beta[:, None] * wxi[None, :]
        total += accumulate(r, wr, theta, wt)
    return total


@lru_cache(maxsize=1024)
def _exclusion_reduction_spline(cell_key, s: float, mode: str, re: float):
    """Spline over d of the C-reduction contributed by one exclusion disk
    whose lattice center sits at distance d from the receiver."""
    prof = _radial_profile(cell_key, s)
    rc, spec = prof.rc, prof.spec
    _check_exclusion_geometry(prof.radius, re, rc, mode)
    d_max = spec.lattice_cap_factor * rc + rc + 1e-9
    grid = np.unique(np.concatenate([
        np.linspace(0.0, 3.0 * rc, 25),
        np.geomspace(3.0 * rc, d_max, 16),
        [d_max],
    ]))
    if mode == "bs":
        # removed domain of the plane integral: disk of radius re at distance d
        r, wr = gl_panel(0.0, re, 16)
        th, wt = gl_panel(0.0, math.pi, 24)      # reflection symmetry: double
        vals = []
        for d in grid:
            rho = np.sqrt(d * d + r[:, None] ** 2 + 2.0 * d * r[:, None] * np.cos(th)[None, :])
            inner = prof.one_minus_l(rho) @ wt
            vals.append(2.0 * float((inner * r) @ wr))
        return CubicSpline(grid, np.array(vals))
    # ue mode: cells near the disk emit less;
    # reduction(d) = int_{|x0 - c_d| < R + re} L_sym(|x0|) (e^{removed} - 1) dx0
    rho0 = prof.radius + re
    r, wr = gl_panel(0.0, rho0, 12)
    th, wt = gl_panel(0.0, math.pi, 16)          # reflection symmetry: double
    vals = []
    for d in grid:
        cd = np.array([d, 0.0])
        acc = 0.0
        for ri, wri in zip(r, wr):
            for ti, wti in zip(th, wt):
                x0 = cd + np.array([ri * math.cos(ti), ri * math.sin(ti)])
                removed = _lens_removed(prof, x0, cd - x0, re, 12, 16)
                if removed <= 0.0:
                    continue
                lsym = math.exp(-float(prof.exponent_interp(np.hypot(*x0))))
                acc += wri * ri * wti * lsym * math.expm1(removed)
        vals.append(2.0 * acc)
    return CubicSpline(grid, np.array(vals))


def _coeff_c_value(config: NetworkConfig, i: int, s: float,
                   view: str, x_B, spec: QuadratureSpec) -> float:
    """C_i(s): plane coefficient of the negative exponential property,
    honouring the configured exclusion regions for the given view."""
    cell_key = _cell_key(config, i, spec)
    prof = _radial_profile(cell_key, s)
    c = prof.c_sym
    ex = config.exclusion
    if ex.mode == "none" or s == 0.0:
        return c
    rc = config.hex_radius
    cap = spec.lattice_cap_factor * rc
    if view == "tier1":
        centers = _base_lattice(rc, cap)
    else:
        if x_B is None:
            raise ValueError("tier-2 view under exclusion needs x_B")
        base = _base_lattice(rc, cap + rc)
        shifted = base + np.asarray(x_B, dtype=float)
        centers = shifted[np.hypot(shifted[:, 0], shifted[:, 1]) <= cap]
    red = _exclusion_reduction_spline(cell_key, s, ex.mode, ex.radius)
    d = np.hypot(centers[:, 0], centers[:, 1])
    return float(c - np.maximum(red(d), 0.0).sum())


# --------------------------------------------------------------------------
# intra-cell tier-2 interference

def _profile_disk_overlap(profile: IntensityProfile, e: float, re: float,
                          order: int = 32) -> float:
    """Profile mass inside the overlap of the cell disk and an exclusion
    disk of radius re whose center is at distance e from the cell center."""
    Rp = profile.support_radius
    total = 0.0
    if e < 1e-12:
        r_hi = min(Rp, re)
        if r_hi > 0:
            r, w = gl_panel(0.0, r_hi, order)
            total = 2.0 * math.pi * float((np.asarray(profile.density(r)) * r) @ w)
        return total
    if e < re:
        r_hi = min(Rp, re - e)
        if r_hi > 0:
            r, w = gl_panel(0.0, r_hi, order)
            total += 2.0 * math.pi * float((np.asarray(profile.density(r)) * r) @ w)
    r_lo, r_hi = max(0.0, abs(e - re)), min(Rp, e + re)
    if r_hi > r_lo:
        r, w = gl_panel(r_lo, r_hi, order)
        cosb = (r * r + e * e - re * re) / (2.0 * r * e)
        beta = np.arccos(np.clip(cosb, -1.0, 1.0))
        total += 2.0 * float((np.asarray(profile.density(r)) * beta * r) @ w)
    return total


def _intra_masses(config: NetworkConfig, l: int, x_B) -> list[float]:
    """Per-class profile mass of the typical type-l cell, minus any part
    falling in UE-exclusion disks (which depend on the macro placement)."""
    bs = config.tier2[l]
    masses = [mean_ue_per_cell(bs, j) for j in range(len(bs.ue_classes))]
    ex = config.exclusion
    if ex.mode != "ue" or x_B is None:
        return masses
    rc = config.hex_radius
    base = _base_lattice(rc, 2.0 * rc + bs.radius + ex.radius)
    centers = base + np.asarray(x_B, dtype=float)
    d = np.hypot(centers[:, 0], centers[:, 1])
    near = centers[d < bs.radius + ex.radius]
    for c in near:
        e = float(np.hypot(*c))
        for j, cls in enumerate(bs.ue_classes):
            masses[j] -= _profile_disk_overlap(cls.profile, e, ex.radius)
    return [max(m, 0.0) for m in masses]


def _intra_log(config: NetworkConfig, l: int, s: float, x_B=None) -> float:
    log_l = 0.0
    masses = _intra_masses(config, l, x_B)
    for cls, mass in zip(config.tier2[l].ue_classes, masses):
        sq = s * cls.target_power
        log_l -= sq / (sq + 1.0) * mass
    return log_l


# --------------------------------------------------------------------------
# public operations

def laplace_tier1_in(config: NetworkConfig, i: int,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> InterferenceLaplace:
    """In-cell tier-1 interference (closed form)."""
    t1 = config.tier1[i]
    area = HEX_AREA_FACTOR * config.hex_radius**2

    def fn(s: float) -> float:
        sp = s * t1.target_power
        return math.exp(-t1.intensity * area * sp / (sp + 1.0))

    return InterferenceLaplace("tier1-intracell", fn)


def laplace_tier1_out(config: NetworkConfig, i: int, at_tier2: bool = False,
                      x_B=None, spec: QuadratureSpec = DEFAULT_SPEC
                      ) -> InterferenceLaplace:
    """Out-of-cell tier-1 interference.

    Tier-1 view: lattice minus the origin cell.  Tier-2 view: the full
    lattice anchored at ``x_B`` (the macro BS nearest to the typical
    tier-2 BS), including the nearest cell.
    """
    t1 = config.tier1[i]
    key = _geom_key(config, spec)
    if at_tier2:
        if x_B is None:
            raise ValueError("tier-2 view needs x_B")
        rc, gamma, sigma_db, _ = key
        xb = np.asarray(x_B, dtype=float)

        def fn(s: float) -> float:
            if t1.intensity == 0.0 or s == 0.0:
                return 1.0
            kernel = shadowed_saturation(sigma_db, spec)
            cap = spec.lattice_cap_factor * rc
            base = _base_lattice(rc, cap + rc)
            shifted = base + xb
            centers = shifted[np.hypot(shifted[:, 0], shifted[:, 1]) <= cap]
            w = _w_cells(centers, s * t1.target_power, rc, gamma, kernel, spec)
            return math.exp(-t1.intensity * float(w.sum()))
    else:

        def fn(s: float) -> float:
            if t1.intensity == 0.0 or s == 0.0:
                return 1.0
            return math.exp(-t1.intensity * _w_sum_tier1(key, s * t1.target_power))

    return InterferenceLaplace("tier1-intercell", fn)


def laplace_cell_aggregate(config: NetworkConfig, i: int, x0, s: float,
                           view: str = "tier1", x_B=None,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Aggregated transform of one tier-2 cell whose BS sits at ``x0``.

    Direct disk quadrature (no radial reduction), honouring UE-exclusion
    disks of the given view; serves as the reference path for the fast
    radial machinery and for tests.
    """
    bs = config.tier2[i]
    if s == 0.0:
        return 1.0
    ex = config.exclusion
    hole = ex.mode == "ue"
    na = spec.hole_angular if hole else spec.disk_angular
    pts, ww, rr = _unit_disk_nodes(spec.disk_radial, na)
    pts = pts * bs.radius
    rr = rr * bs.radius
    ww = ww * bs.radius**2
    x0 = np.asarray(x0, dtype=float)
    gamma = config.channel.pathloss_exponent
    kernel = shadowed_saturation(config.channel.shadow_sigma_db, spec)
    absd2 = (x0[0] + pts[:, 0]) ** 2 + (x0[1] + pts[:, 1]) ** 2
    dg = _pow_gamma(absd2, gamma)
    rg = _pow_gamma(rr * rr, gamma)
    mask = np.ones(len(pts))
    if hole:
        from .geometry import in_exclusion_many

        offset = (0.0, 0.0) if view == "tier1" or x_B is None else tuple(np.asarray(x_B, float))
        lattice = HexLattice(config.hex_radius, offset)
        mask = np.where(in_exclusion_many(pts + x0, lattice, ex), 0.0, 1.0)
    exponent = 0.0
    for cls in bs.ue_classes:
        nu = np.asarray(cls.profile.density(rr), dtype=float)
        exponent += float((kernel(s * cls.target_power * rg / dg) * nu * mask) @ ww)
    return math.exp(-exponent)


def coeff_C(config: NetworkConfig, i: int, s: float, view: str = "tier1",
            x_B=None, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Plane coefficient C_i(s) = integral of (1 - cell transform), in km^2.

    Independent of every mu; under BS exclusion the integration domain
    drops the exclusion disks, under UE exclusion the cells near macro BSs
    emit less.  The tier-2 view needs ``x_B`` only when exclusion is on.
    """
    return _coeff_c_value(config, i, s, view, x_B, spec)


def laplace_tier2_total(config: NetworkConfig, view: str = "tier1", x_B=None,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> InterferenceLaplace:
    """Aggregate interference from all tier-2 cells: product over types of
    exp(-mu_i C_i(s))."""

    def fn(s: float) -> float:
        log_l = 0.0
        for i, bs in enumerate(config.tier2):
            if bs.intensity == 0.0:
                continue
            log_l -= bs.intensity * _coeff_c_value(config, i, s, view, x_B, spec)
        return math.exp(log_l)

    return InterferenceLaplace("tier2-aggregate", fn)


def laplace_tier2_intra(config: NetworkConfig, l: int, x_B=None,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> InterferenceLaplace:
    """Intra-cell interference at the typical type-l tier-2 BS.

    The value is the same for every querying class: removing the typical
    UE from its class leaves the class law unchanged.
    """

    def fn(s: float) -> float:
        return math.exp(_intra_log(config, l, s, x_B))

    return InterferenceLaplace("tier2-intracell", fn)


def apply_orthogonal_thinning(config: NetworkConfig) -> NetworkConfig:
    """Independent-thinning approximation of orthogonal multiple access:
    interferer intensities divide by the block count and the structurally
    silent intra-cell terms are flagged off."""
    if config.access.mode != "orthogonal":
        raise ValueError("config does not use orthogonal access")
    n = config.access.blocks
    if n is None or n < 1:
        raise ValueError("orthogonal access needs a positive block count")

    def scale_profile(p: IntensityProfile) -> IntensityProfile:
        if p.kind == "tabulated":
            return replace(p, densities=tuple(d / n for d in p.densities))
        return replace(p, amplitude=p.amplitude / n)

    tier1 = tuple(replace(t, intensity=t.intensity / n) for t in config.tier1)
    tier2 = tuple(
        replace(bs, ue_classes=tuple(
            replace(c, profile=scale_profile(c.profile)) for c in bs.ue_classes))
        for bs in config.tier2
    )
    from .model import AccessMode

    return config.with_(
        tier1=tier1, tier2=tier2, access=AccessMode.shared(),
        drop_tier1_intracell=True, drop_tier2_intracell=True,
    )


def _effective(config: NetworkConfig) -> NetworkConfig:
    if config.access.mode == "orthogonal":
        return apply_orthogonal_thinning(config)
    return config


def tier1_total_laplace(config: NetworkConfig,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> InterferenceLaplace:
    """Combined tier-1 UE interference at a tier-1 BS: product over types of
    the in-cell and out-of-cell transforms (in-cell dropped when flagged)."""
    cfg = _effective(config)
    key = _geom_key(cfg, spec)
    area = HEX_AREA_FACTOR * cfg.hex_radius**2

    def fn(s: float) -> float:
        log_l = 0.0
        for t1 in cfg.tier1:
            if t1.intensity == 0.0:
                continue
            sp = s * t1.target_power
            if not cfg.drop_tier1_intracell:
                log_l -= t1.intensity * area * sp / (sp + 1.0)
            if s:
                log_l -= t1.intensity * _w_sum_tier1(key, sp)
        return math.exp(log_l)

    return InterferenceLaplace("tier1-total", fn)


def tier1_placement_average(config: NetworkConfig,
                            spec: QuadratureSpec = DEFAULT_SPEC) -> InterferenceLaplace:
    """Tier-1 UE interference at a tier-2 BS, averaged over the macro
    placement x_B (the factored no-exclusion path)."""
    cfg = _effective(config)
    key = _geom_key(cfg, spec)

    def fn(s: float) -> float:
        log_sum = None
        xb_wts = denom = None
        for t1 in cfg.tier1:
            xb_pts, xb_wts, denom, S = _w_sum_xb(key, s * t1.target_power,
                                                 "none", 0.0)
            contrib = t1.intensity * S
            log_sum = contrib if log_sum is None else log_sum + contrib
        if log_sum is None:
            return 1.0
        return float(np.exp(-log_sum) @ xb_wts) / denom

    return InterferenceLaplace("tier1-at-tier2", fn)


def outage_tier1(config: NetworkConfig, query: TypicalQuery,
                 spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Outage probability of a typical type-k tier-1 UE."""
    query.check(config)
    if query.tier != 1:
        raise ValueError("query is not a tier-1 query")
    cfg = _effective(config)
    s = query.sir_threshold / cfg.tier1[query.ue_type].target_power
    log_l = math.log(tier1_total_laplace(cfg, spec)(s))
    for i, bs in enumerate(cfg.tier2):
        if bs.intensity:
            log_l -= bs.intensity * _coeff_c_value(cfg, i, s, "tier1", None, spec)
    return 1.0 - math.exp(log_l)


def outage_tier2(config: NetworkConfig, query: TypicalQuery,
                 spec: QuadratureSpec = DEFAULT_SPEC,
                 force_unfactored: bool = False) -> float:
    """Outage probability of a typical class-k UE in a type-l tier-2 cell.

    Without exclusion regions only the tier-1 term depends on the macro
    placement, so the placement average factors; ``force_unfactored``
    exercises the full conditional average instead (the two must agree).
    """
    query.check(config)
    if query.tier != 2:
        raise ValueError("query is not a tier-2 query")
    cfg = _effective(config)
    l, k = query.bs_type, query.ue_class
    s = query.sir_threshold / cfg.tier2[l].ue_classes[k].target_power
    ex = cfg.exclusion
    key = _geom_key(cfg, spec)

    if ex.mode == "none" and not force_unfactored:
        # factored path: average only the tier-1 term over the placement
        lbar1 = tier1_placement_average(cfg, spec)(s)
        log_rest = 0.0
        for i, bs in enumerate(cfg.tier2):
            if bs.intensity:
                log_rest -= bs.intensity * _coeff_c_value(cfg, i, s, "tier1",
                                                          None, spec)
        if not cfg.drop_tier2_intracell:
            log_rest += _intra_log(cfg, l, s, None)
        return 1.0 - lbar1 * math.exp(log_rest)

    # conditional average of the full product over the placement
    mode = ex.mode if ex.mode == "bs" else "none"
    re1 = ex.radius if ex.mode == "bs" else 0.0
    log_sums = None
    xb_pts = xb_wts = denom = None
    for i, t1 in enumerate(cfg.tier1):
        xb_pts, xb_wts, denom, S = _w_sum_xb(key, s * t1.target_power, mode, re1)
        contrib = t1.intensity * S
        log_sums = contrib if log_sums is None else log_sums + contrib
    if xb_pts is None:
        xb_pts, xb_wts, denom = _xb_quadrature(cfg.hex_radius, spec, mode, re1)
        log_sums = np.zeros(len(xb_pts))
    vals = np.empty(len(xb_pts))
    for mi, xb in enumerate(xb_pts):
        log_l = -float(log_sums[mi])
        for i, bs in enumerate(cfg.tier2):
            if bs.intensity:
                log_l -= bs.intensity * _coeff_c_value(cfg, i, s, "tier2",
                                                       tuple(xb), spec)
        if not cfg.drop_tier2_intracell:
            log_l += _intra_log(cfg, l, s, xb)
        vals[mi] = math.exp(log_l)
    return 1.0 - float(vals @ xb_wts) / denom


def average_outage(config: NetworkConfig, sir_threshold: float,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """UE-count-weighted average of both tiers' outage (single-type only)."""
    if len(config.tier1) != 1 or len(config.tier2) != 1 \
            or len(config.tier2[0].ue_classes) != 1:
        raise ValueError("average_outage needs a single-type config (M=N=K=1)")
    lam = config.tier1[0].intensity
    mu = config.tier2[0].intensity
    nbar = mean_ue_per_cell(config.tier2[0], 0)
    weight2 = mu * nbar
    if lam + weight2 == 0.0:
        return 0.0
    p1 = outage_tier1(config, TypicalQuery.tier1(0, sir_threshold), spec) if lam else 0.0
    p2 = outage_tier2(config, TypicalQuery.tier2(0, 0, sir_threshold), spec) if weight2 else 0.0
    return (p1 * lam + p2 * weight2) / (lam + weight2)
