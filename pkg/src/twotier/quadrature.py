"""Numerical integration primitives.

Log-normal expectations via Gauss-Hermite, hexagons via 6-triangle tensor
Gauss-Legendre, disks via polar Gauss-Legendre (with optional indicator
holes), adaptive annular plane integrals, and capped lattice sums.  All
rules are deterministic, linear in the integrand, and exact for constants
on bounded domains.

Everything is stateless apart from memoised node tables; callers may
evaluate concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .model import shadow_sigma_ln

SQRT3 = math.sqrt(3.0)


class NumericalError(RuntimeError):
    """An integrand produced a non-finite value."""


class TruncationError(RuntimeError):
    """Adaptive plane truncation failed to converge."""

    def __init__(self, message: str, last_iterates: tuple):
        super().__init__(message)
        self.last_iterates = last_iterates


@dataclass(frozen=True)
class QuadratureSpec:
    """Orders and tolerances for every rule in the package.

    ``plane_start_factor`` and ``lattice_cap_factor`` are multiples of the
    hexagon radius.  ``hole_angular`` is the elevated angular order used
    when an indicator hole makes the disk integrand discontinuous.
    """

    hermite_nodes: int = 32
    hexagon_order: int = 16        # tensor GL order per triangle (6 triangles)
    disk_radial: int = 32
    disk_angular: int = 32
    hole_angular: int = 64
    plane_start_factor: float = 15.0
    plane_rel_tol: float = 1e-6
    max_doublings: int = 12
    lattice_cap_factor: float = 10.0
    radial_panel_order: int = 24   # GL order per panel in 1-D radial integrals
    xb_order: int = 8              # per-triangle order for receiver averaging
    table_points: int = 65536      # density of the shadowing kernel table

    def __post_init__(self):
        for name in ("hermite_nodes", "hexagon_order", "disk_radial",
                     "disk_angular", "hole_angular", "radial_panel_order",
                     "xb_order"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if not 0.0 < self.plane_rel_tol <= 1e-2:
            raise ValueError("plane_rel_tol must lie in (0, 1e-2]")

    def doubled(self) -> "QuadratureSpec":
        """Same spec with every order doubled (convergence checks)."""
        return replace(
            self,
            hermite_nodes=2 * self.hermite_nodes,
            hexagon_order=2 * self.hexagon_order,
            disk_radial=2 * self.disk_radial,
            disk_angular=2 * self.disk_angular,
            hole_angular=2 * self.hole_angular,
            radial_panel_order=2 * self.radial_panel_order,
            xb_order=2 * self.xb_order,
            table_points=2 * self.table_points,
        )


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=16)
def _hermgauss(n: int):
    z, w = np.polynomial.hermite.hermgauss(n)
    return z, w / math.sqrt(math.pi)


def gl_panel(a: float, b: float, n: int):
    """Gauss-Legendre nodes/weights on [a, b]."""
    x, w = _leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def expect_lognormal(f, sigma_db: float, n_nodes: int = 32) -> float:
    """E[f(g)] for g log-normal with 10*log10(g) ~ N(0, sigma_db^2).

    Uses the substitution g = exp(sigma_ln*sqrt(2)*z) and Gauss-Hermite.
    """
    z, w = _hermgauss(n_nodes)
    g = np.exp(shadow_sigma_ln(sigma_db) * math.sqrt(2.0) * z)
    vals = np.asarray([f(gi) for gi in g], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand returned a non-finite value")
    return float(vals @ w)


# --- hexagon ---------------------------------------------------------------

@lru_cache(maxsize=32)
def _unit_hex_nodes(order: int):
    """Nodes/weights on the flat-topped unit hexagon (6 collapsed squares)."""
    x, w = _leggauss(order)
    verts = [
        np.array([math.cos(k * math.pi / 3.0), math.sin(k * math.pi / 3.0)])
        for k in range(6)
    ]
    pts = []
    wts = []
    for k in range(6):
        A, B = verts[k], verts[(k + 1) % 6]
        cross = abs(A[0] * B[1] - A[1] * B[0])
        for i, xi in enumerate(x):
            u = 0.5 * (xi + 1.0)
            edge = np.outer((1.0 - 0.5 * (x + 1.0)), A) + np.outer(0.5 * (x + 1.0), B)
            pts.append(u * edge)
            wts.append(w[i] * w * (1.0 + xi) / 8.0 * cross)
    return np.concatenate(pts), np.concatenate(wts)


def hexagon_nodes(center, hex_radius: float, order: int):
    pts, wts = _unit_hex_nodes(order)
    return pts * hex_radius + np.asarray(center, dtype=float), wts * hex_radius**2


def integrate_hexagon(f, center, hex_radius: float,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of f over the flat-topped hexagon of circumradius hex_radius."""
    pts, wts = hexagon_nodes(center, hex_radius, spec.hexagon_order)
    return float(np.asarray(f(pts), dtype=float) @ wts)


# --- disk ------------------------------------------------------------------

@lru_cache(maxsize=64)
def _unit_disk_nodes(nr: int, na: int):
    r, wr = gl_panel(0.0, 1.0, nr)
    th, wa = gl_panel(0.0, 2.0 * math.pi, na)
    rr = np.repeat(r, na)
    tt = np.tile(th, nr)
    ww = np.repeat(wr * r, na) * np.tile(wa, nr)
    pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=1)
    return pts, ww, rr


def disk_nodes(center, radius: float, nr: int, na: int):
    pts, ww, rr = _unit_disk_nodes(nr, na)
    return pts * radius + np.asarray(center, dtype=float), ww * radius**2, rr * radius


def integrate_disk(f, center, radius: float, hole=None,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Polar GL integral over a disk.

    ``hole`` is a predicate on (n,2) points whose True region is removed.
    The indicator makes the integrand discontinuous, so the hole path uses
    composite panels in both directions (8 radial panels, and the elevated
    angular order split into 8 panels); the jump then lies inside a single
    small panel and its O(1/n) damage is confined there.
    """
    center = np.asarray(center, dtype=float)
    if hole is None:
        pts, ww, _ = disk_nodes(center, radius, spec.disk_radial, spec.disk_angular)
        return float(np.asarray(f(pts), dtype=float) @ ww)
    # the indicator is discontinuous; along each angular ray, locate its
    # transition radii by scan + bisection and integrate the kept segments
    # with their own Gauss panels; the angular rule is composite because the
    # segment bounds have sqrt-kinks at hole-tangency angles
    n_ang_panels = 16
    na = max(spec.hole_angular // n_ang_panels, 8)
    edges = np.linspace(0.0, 2.0 * math.pi, n_ang_panels + 1)
    th = np.concatenate([gl_panel(a, b, na)[0] for a, b in zip(edges[:-1], edges[1:])])
    wt = np.concatenate([gl_panel(a, b, na)[1] for a, b in zip(edges[:-1], edges[1:])])
    nr = max(spec.disk_radial // 2, 8)
    probes = np.linspace(0.0, radius, 65)
    probes[0] = 1e-12 * radius
    total = 0.0
    for theta, w_th in zip(th, wt):
        ray = np.array([math.cos(theta), math.sin(theta)])
        inside = np.asarray(hole(center + probes[:, None] * ray), dtype=bool)
        cuts = [0.0]
        for k in np.nonzero(inside[1:] != inside[:-1])[0]:
            lo, hi = probes[k], probes[k + 1]
            ref = inside[k]
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if bool(hole((center + mid * ray)[None, :])[0]) == ref:
                    lo = mid
                else:
                    hi = mid
            cuts.append(0.5 * (lo + hi))
        cuts.append(radius)
        keep = ~inside[0]
        for a, b in zip(cuts[:-1], cuts[1:]):
            if keep and b > a:
                r, wr = gl_panel(a, b, nr)
                vals = np.asarray(f(center + r[:, None] * ray), dtype=float)
                total += w_th * float((vals * r) @ wr)
            keep = not keep
    return total


# --- plane -----------------------------------------------------------------

@dataclass(frozen=True)
class PlaneIntegral:
    value: float
    truncation_radius: float

    def __float__(self) -> float:
        return self.value


def _annulus(f, r0: float, r1: float, nr: int, na: int) -> float:
    r, wr = gl_panel(r0, r1, nr)
    th, wa = gl_panel(0.0, 2.0 * math.pi, na)
    rr = np.repeat(r, na)
    tt = np.tile(th, nr)
    ww = np.repeat(wr * r, na) * np.tile(wa, nr)
    pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=1)
    vals = np.asarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand returned a non-finite value")
    return float(vals @ ww)


def integrate_plane(f, spec: QuadratureSpec = DEFAULT_SPEC,
                    start_radius: float | None = None) -> PlaneIntegral:
    """Integral of f over the plane for integrands decaying faster than
    |x|^-2: polar quadrature out to an adaptive truncation radius that
    doubles until the relative change drops below ``plane_rel_tol``."""
    r_start = float(start_radius if start_radius is not None else spec.plane_start_factor)
    nr, na = spec.radial_panel_order, spec.disk_angular
    # inner disk, geometric radial panels to resolve behaviour near 0
    breaks = [0.0] + [r_start * 2.0 ** (-k) for k in range(6, -1, -1)]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += _annulus(f, a, b, nr, na)
    radius = r_start
    prev_total = total
    for _ in range(spec.max_doublings):
        piece = _annulus(f, radius, 2.0 * radius, nr, na)
        radius *= 2.0
        prev_total, total = total, total + piece
        denom = abs(total) if total != 0.0 else 1.0
        if abs(total - prev_total) <= spec.plane_rel_tol * denom:
            return PlaneIntegral(total, radius)
    raise TruncationError(
        f"plane integral did not settle after {spec.max_doublings} doublings "
        f"(radius {radius:g})",
        (prev_total, total),
    )


# --- lattice sums ----------------------------------------------------------

def lattice_sum(f, lattice, exclude_origin: bool,
                spec: QuadratureSpec = DEFAULT_SPEC,
                radius_cap: float | None = None) -> float:
    """Sum of a per-cell function over lattice centers within the cap."""
    from .geometry import lattice_centers

    cap = radius_cap if radius_cap is not None else (
        spec.lattice_cap_factor * lattice.hex_radius
    )
    centers = lattice_centers(lattice, cap)
    if exclude_origin:
        keep = np.hypot(centers[:, 0], centers[:, 1]) > 1e-12 * lattice.hex_radius
        centers = centers[keep]
    return float(sum(f(c) for c in centers))


# --- shadowing interference kernel ------------------------------------------

@lru_cache(maxsize=16)
def _saturation_table(sigma_db: float, n_herm: int, n_points: int):
    z, w = _hermgauss(n_herm)
    g = np.exp(shadow_sigma_ln(sigma_db) * math.sqrt(2.0) * z)
    lt = np.linspace(-45.0, 45.0, n_points)
    tg = np.exp(lt)[:, None] * g[None, :]
    vals = (tg / (tg + 1.0)) @ w
    return lt, vals


def shadowed_saturation(sigma_db: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """Fast evaluator of t -> E_g[t*g / (t*g + 1)] over the shadowing ratio.

    This is the kernel every interference exponent integrates; it is
    tabulated against log t once per (sigma, spec) and then evaluated by
    linear interpolation (the table is dense enough that interpolation
    error is ~1e-8, far below quadrature tolerances).
    """
    lt, vals = _saturation_table(float(sigma_db), spec.hermite_nodes, spec.table_points)
    sigma_ln = shadow_sigma_ln(sigma_db)
    moment = math.exp(sigma_ln**2 / 2.0)   # E[g] = E[1/g] for a 0-mean log-normal

    def kernel(t):
        t = np.asarray(t, dtype=float)
        safe = np.maximum(t, 1e-300)
        ltq = np.log(safe)
        out = np.interp(ltq, lt, vals)
        # asymptotes outside the table: E[tg/(tg+1)] ~ t E[g] for small t
        # and 1 - E[1/g]/t for large t (table edges would otherwise clamp
        # to constants and destroy the tail decay of plane integrals)
        out = np.where(ltq < lt[0], t * moment, out)
        out = np.where(ltq > lt[-1], 1.0 - moment / safe, out)
        return out

    return kernel
