"""Hexagonal lattice, region predicates, and point-process sampling.

The macro grid is the triangular lattice
``{(3/2*a*Rc, sqrt(3)/2*a*Rc + sqrt(3)*b*Rc) + offset}``; its Voronoi
cells are flat-topped regular hexagons of circumradius Rc (apothem
sqrt(3)/2*Rc), which fixes the orientation used everywhere:
vertices on the rays at 0, 60, ..., 300 degrees.

All samplers are pure functions of an injected ``numpy.random.Generator``;
parallel trials should each own a stream from :func:`trial_rng`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ExclusionConfig

SQRT3 = math.sqrt(3.0)
HEX_AREA_FACTOR = 3.0 * SQRT3 / 2.0  # hexagon area = factor * Rc^2

# outward edge normals of the flat-topped unit hexagon (3 slab axes)
_NORMALS = np.array(
    [
        [SQRT3 / 2.0, 0.5],
        [0.0, 1.0],
        [-SQRT3 / 2.0, 0.5],
    ]
)
# unit-hexagon vertices, one per 60 degrees starting at +x
_VERTS = np.array(
    [[math.cos(k * math.pi / 3.0), math.sin(k * math.pi / 3.0)] for k in range(6)]
)


@dataclass(frozen=True)
class HexLattice:
    hex_radius: float
    offset: tuple = (0.0, 0.0)

    @property
    def area(self) -> float:
        return HEX_AREA_FACTOR * self.hex_radius**2

    def center(self, a: int, b: int) -> np.ndarray:
        rc = self.hex_radius
        return np.array(
            [1.5 * a * rc + self.offset[0], (SQRT3 / 2.0 * a + SQRT3 * b) * rc + self.offset[1]]
        )


@dataclass(frozen=True)
class PointPattern:
    """Finite planar point set with an optional per-point mark array."""

    points: np.ndarray                      # (n, 2) km
    type_index: int | None = None
    marks: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def empty(type_index: int | None = None) -> "PointPattern":
        return PointPattern(np.empty((0, 2)), type_index)


def lattice_centers(lattice: HexLattice, radius_cap: float) -> np.ndarray:
    """All lattice centers with |x| <= radius_cap, sorted by (|x|, angle)."""
    if radius_cap <= 0:
        raise ValueError("radius_cap must be positive")
    rc = lattice.hex_radius
    off = np.asarray(lattice.offset, dtype=float)
    reach = radius_cap + float(np.hypot(*off))
    m = int(math.ceil(reach / (1.5 * rc))) + 2
    a = np.arange(-m, m + 1)
    b = np.arange(-int(math.ceil(reach / (SQRT3 * rc))) - m - 2,
                  int(math.ceil(reach / (SQRT3 * rc))) + m + 3)
    aa, bb = np.meshgrid(a, b, indexing="ij")
    cx = 1.5 * aa * rc + off[0]
    cy = (SQRT3 / 2.0 * aa + SQRT3 * bb) * rc + off[1]
    r = np.hypot(cx, cy)
    keep = r <= radius_cap
    cx, cy, r = cx[keep], cy[keep], r[keep]
    ang = np.arctan2(cy, cx)
    order = np.lexsort((ang, r))
    return np.stack([cx[order], cy[order]], axis=1)


def _slab_coords(u: np.ndarray) -> np.ndarray:
    """Projections of relative coordinates onto the three edge-normal axes."""
    return u @ _NORMALS.T


def hexagon_contains(center, hex_radius: float, x) -> bool:
    """Membership in the flat-topped hexagon, tiling-consistent.

    Interior points belong outright; boundary points go to the
    lexicographically smallest of the cells sharing that boundary, so the
    lattice cells partition the plane.
    """
    center = np.asarray(center, dtype=float)
    u = np.asarray(x, dtype=float) - center
    apothem = SQRT3 / 2.0 * hex_radius
    proj = _slab_coords(u[None, :])[0]
    if np.any(np.abs(proj) > apothem):
        return False
    on = np.abs(np.abs(proj) - apothem) == 0.0
    if not np.any(on):
        return True
    # boundary: compare against the neighbours across each touching edge
    cands = [tuple(center)]
    for k in range(3):
        if on[k]:
            s = 1.0 if proj[k] > 0 else -1.0
            nb = center + s * SQRT3 * hex_radius * _NORMALS[k]
            cands.append(tuple(nb))
    return min(cands) == tuple(center)


def nearest_center(lattice: HexLattice, pts: np.ndarray) -> np.ndarray:
    """Nearest lattice center for each point, ties broken lexicographically.

    Exact for any point: candidates are the 9 lattice sites around the
    real-valued basis coordinates.  Candidate scan order is lexicographic
    in the center coordinates, so argmin's first-hit rule implements the
    tie-break.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    rc = lattice.hex_radius
    off = np.asarray(lattice.offset, dtype=float)
    q = pts - off
    a_real = q[:, 0] / (1.5 * rc)
    b_real = q[:, 1] / (SQRT3 * rc) - a_real / 2.0
    a0 = np.floor(a_real).astype(int)
    b0 = np.floor(b_real).astype(int)
    best_d = np.full(len(pts), np.inf)
    best = np.zeros_like(pts)
    for da in (-1, 0, 1):          # increasing a <=> increasing center x
        for db in (-1, 0, 1):      # increasing b <=> increasing center y at fixed a
            aa = a0 + da
            bb = b0 + db
            cx = 1.5 * aa * rc + off[0]
            cy = (SQRT3 / 2.0 * aa + SQRT3 * bb) * rc + off[1]
            d = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2
            take = d < best_d
            best_d[take] = d[take]
            best[take, 0] = cx[take]
            best[take, 1] = cy[take]
    return best


def nearest_bs(x, lattice: HexLattice) -> np.ndarray:
    """The lattice center closest to a single point x."""
    return nearest_center(lattice, np.asarray(x, dtype=float)[None, :])[0]


@dataclass(frozen=True)
class Hexagon:
    center: tuple
    hex_radius: float

    @property
    def area(self) -> float:
        return HEX_AREA_FACTOR * self.hex_radius**2


@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


def sample_uniform_hexagon(center, hex_radius: float, n: int, rng) -> np.ndarray:
    """n i.i.d. uniform points in the hexagon (triangle-decomposition draw)."""
    if n == 0:
        return np.empty((0, 2))
    k = rng.integers(0, 6, n)
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    A = _VERTS[k] * hex_radius
    B = _VERTS[(k + 1) % 6] * hex_radius
    pts = u[:, None] * A + v[:, None] * B
    return pts + np.asarray(center, dtype=float)


def sample_uniform_disk(center, radius: float, n: int, rng) -> np.ndarray:
    if n == 0:
        return np.empty((0, 2))
    r = radius * np.sqrt(rng.random(n))
    th = 2.0 * math.pi * rng.random(n)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    return pts + np.asarray(center, dtype=float)


def sample_ppp_region(intensity: float, region, rng) -> PointPattern:
    """Homogeneous PPP on a Hexagon or Disk region."""
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    n = rng.poisson(intensity * region.area)
    if isinstance(region, Hexagon):
        pts = sample_uniform_hexagon(region.center, region.hex_radius, n, rng)
    elif isinstance(region, Disk):
        pts = sample_uniform_disk(region.center, region.radius, n, rng)
    else:
        raise TypeError(f"unsupported region {type(region).__name__}")
    return PointPattern(pts)


def sample_clustered_ues(profile, center, rng) -> PointPattern:
    """Inhomogeneous PPP draw for one cell via thinning.

    A homogeneous candidate process at the profile's max density is thinned
    point-wise with probability nu(|x-center|)/max.
    """
    vmax = profile.max_density
    R = profile.support_radius
    if vmax <= 0 or R <= 0:
        return PointPattern.empty()
    n = rng.poisson(vmax * math.pi * R * R)
    pts = sample_uniform_disk((0.0, 0.0), R, n, rng)
    if n:
        r = np.hypot(pts[:, 0], pts[:, 1])
        keep = rng.random(n) < profile.density(r) / vmax
        pts = pts[keep]
    return PointPattern(pts + np.asarray(center, dtype=float))


def in_exclusion_many(pts: np.ndarray, lattice: HexLattice,
                      exclusion: ExclusionConfig) -> np.ndarray:
    """Vectorised membership in the union of exclusion disks."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if exclusion.mode == "none" or len(pts) == 0:
        return np.zeros(len(pts), dtype=bool)
    near = nearest_center(lattice, pts)
    d = np.hypot(pts[:, 0] - near[:, 0], pts[:, 1] - near[:, 1])
    return d <= exclusion.radius


def in_exclusion(x, lattice: HexLattice, exclusion: ExclusionConfig) -> bool:
    return bool(in_exclusion_many(np.asarray(x, dtype=float)[None, :], lattice, exclusion)[0])


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one Monte Carlo trial."""
    return np.random.Generator(np.random.Philox(key=[int(seed), int(trial_index)]))
