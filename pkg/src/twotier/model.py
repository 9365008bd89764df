"""Domain types and validation for the two-tier uplink model.

Conventions used throughout the package:
  * distances in km, intensities in points/km^2,
  * powers stored linear (mW); dBm only at the config-file boundary,
  * the shadowing ratio between the far-field factors toward the victim
    and toward the serving BS is a single log-normal, parameterised by
    the standard deviation of its dB value (10*log10), see
    :func:`shadow_sigma_ln`,
  * fast fading is unit-mean exponential power (Rayleigh) and is not
    configurable.

All types are immutable after construction and safe to share across
workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

LN10 = math.log(10.0)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def shadow_sigma_ln(sigma_db: float) -> float:
    """Natural-log std of the shadowing ratio g.

    ``sigma_db`` is the standard deviation of 10*log10(g); g multiplies a
    power, so the power-dB convention applies.  This single helper feeds
    both the analytic transforms and the simulator so the two engines
    always share the same shadowing law.
    """
    return sigma_db * LN10 / 10.0


@dataclass(frozen=True)
class ChannelParams:
    """Propagation-model constants shared by every link."""

    pathloss_constant: float = 1.0   # A in A*d^gamma; cancels in all SIR ratios
    pathloss_exponent: float = 4.0   # gamma, must exceed 2 for plane integrals
    shadow_sigma_db: float = 4.0     # std of 10*log10 of the shadowing ratio

    @property
    def sigma_ln(self) -> float:
        return shadow_sigma_ln(self.shadow_sigma_db)


@dataclass(frozen=True)
class Tier1UEType:
    intensity: float      # lambda_i, points/km^2
    target_power: float   # P_i, linear mW (received power after control)


@dataclass(frozen=True)
class IntensityProfile:
    """Radially symmetric tier-2 UE density with finite support.

    kinds:
      constant   nu(r) = amplitude                       for r <= R
      rising     nu(r) = amplitude * r / R               (edge-heavy)
      falling    nu(r) = amplitude * (R - r) / R         (center-heavy)
      tabulated  linear interpolation of (radii, densities), 0 past R
    """

    kind: str
    support_radius: float
    amplitude: float = 0.0
    radii: tuple = ()
    densities: tuple = ()

    KINDS = ("constant", "rising", "falling", "tabulated")

    @staticmethod
    def constant(density: float, support_radius: float) -> "IntensityProfile":
        return IntensityProfile("constant", support_radius, density)

    @staticmethod
    def rising(peak_density: float, support_radius: float) -> "IntensityProfile":
        return IntensityProfile("rising", support_radius, peak_density)

    @staticmethod
    def falling(center_density: float, support_radius: float) -> "IntensityProfile":
        return IntensityProfile("falling", support_radius, center_density)

    @staticmethod
    def tabulated(radii, densities) -> "IntensityProfile":
        radii = tuple(float(r) for r in radii)
        densities = tuple(float(d) for d in densities)
        support = radii[-1] if radii else 0.0
        return IntensityProfile("tabulated", support, 0.0, radii, densities)

    def density(self, r):
        """nu(r) for scalar or ndarray radius r (km)."""
        import numpy as np

        r = np.asarray(r, dtype=float)
        R = self.support_radius
        if self.kind == "constant":
            out = np.full_like(r, self.amplitude)
        elif self.kind == "rising":
            out = self.amplitude * r / R
        elif self.kind == "falling":
            out = self.amplitude * (R - r) / R
        elif self.kind == "tabulated":
            out = np.interp(r, self.radii, self.densities)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        out = np.where(r > R, 0.0, out)
        return out if out.ndim else float(out)

    __call__ = density

    @property
    def max_density(self) -> float:
        if self.kind in ("constant", "rising", "falling"):
            return self.amplitude
        return max(self.densities, default=0.0)

    def mean_count(self) -> float:
        """Closed-form integral of nu over the plane (expected UEs per cell)."""
        R = self.support_radius
        a = self.amplitude
        if self.kind == "constant":
            return a * math.pi * R * R
        if self.kind == "rising":
            return 2.0 * math.pi * a * R * R / 3.0
        if self.kind == "falling":
            return math.pi * a * R * R / 3.0
        if self.kind == "tabulated":
            total = 0.0
            for (r0, r1), (d0, d1) in zip(
                zip(self.radii[:-1], self.radii[1:]),
                zip(self.densities[:-1], self.densities[1:]),
            ):
                if r1 <= r0:
                    continue
                # int_{r0}^{r1} (d0 + (d1-d0)(r-r0)/(r1-r0)) * 2 pi r dr
                slope = (d1 - d0) / (r1 - r0)
                c0 = d0 - slope * r0
                total += 2.0 * math.pi * (
                    c0 * (r1**2 - r0**2) / 2.0 + slope * (r1**3 - r0**3) / 3.0
                )
            return total
        raise ValueError(f"unknown profile kind {self.kind!r}")


@dataclass(frozen=True)
class Tier2UEClass:
    target_power: float          # Q_ij, linear mW
    profile: IntensityProfile    # nu_ij


@dataclass(frozen=True)
class Tier2BSType:
    intensity: float             # mu_i, points/km^2
    radius: float                # R_i, km (communication radius)
    ue_classes: tuple = ()       # Tier2UEClass per class index j


@dataclass(frozen=True)
class ExclusionConfig:
    mode: str = "none"           # "none" | "bs" | "ue"
    radius: float | None = None  # R_e,1 or R_e,2, km

    MODES = ("none", "bs", "ue")

    @staticmethod
    def none() -> "ExclusionConfig":
        return ExclusionConfig("none", None)

    @staticmethod
    def bs_exclusion(radius: float) -> "ExclusionConfig":
        return ExclusionConfig("bs", radius)

    @staticmethod
    def ue_exclusion(radius: float) -> "ExclusionConfig":
        return ExclusionConfig("ue", radius)


@dataclass(frozen=True)
class AccessMode:
    mode: str = "shared"         # "shared" | "orthogonal"
    blocks: int | None = None    # n resource blocks (orthogonal only)

    @staticmethod
    def shared() -> "AccessMode":
        return AccessMode("shared", None)

    @staticmethod
    def orthogonal(n: int) -> "AccessMode":
        return AccessMode("orthogonal", n)


@dataclass(frozen=True)
class NetworkConfig:
    """Complete two-tier network parameterisation.

    ``drop_tier1_intracell``/``drop_tier2_intracell`` are set by the
    orthogonal-access transform; they suppress the corresponding
    interference terms in the analytic outage assembly.
    """

    hex_radius: float
    channel: ChannelParams = field(default_factory=ChannelParams)
    tier1: tuple = ()            # Tier1UEType
    tier2: tuple = ()            # Tier2BSType
    exclusion: ExclusionConfig = field(default_factory=ExclusionConfig.none)
    access: AccessMode = field(default_factory=AccessMode.shared)
    drop_tier1_intracell: bool = False
    drop_tier2_intracell: bool = False

    def with_(self, **kw) -> "NetworkConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def validate(config: NetworkConfig) -> list[Violation]:
    """Return every invariant violation (empty list means the config is ok).

    Total on any finite numeric input: violations are data, not faults.
    """
    out: list[Violation] = []

    def bad(path, msg):
        out.append(Violation(path, msg))

    if not _finite(config.hex_radius) or config.hex_radius <= 0:
        bad("hex_radius", "must be a positive finite length (km)")

    ch = config.channel
    if not _finite(ch.pathloss_constant) or ch.pathloss_constant <= 0:
        bad("channel.pathloss_constant", "must be positive")
    if not _finite(ch.pathloss_exponent) or ch.pathloss_exponent <= 2.0:
        bad("channel.pathloss_exponent", "pathloss_exponent must exceed 2")
    if not _finite(ch.shadow_sigma_db) or ch.shadow_sigma_db < 0:
        bad("channel.shadow_sigma_db", "must be nonnegative (dB)")

    for i, t in enumerate(config.tier1):
        if not _finite(t.intensity) or t.intensity < 0:
            bad(f"tier1[{i}].intensity", "must be nonnegative")
        if not _finite(t.target_power) or t.target_power <= 0:
            bad(f"tier1[{i}].target_power", "must be positive (linear mW)")

    for i, bs in enumerate(config.tier2):
        if not _finite(bs.intensity) or bs.intensity < 0:
            bad(f"tier2[{i}].intensity", "must be nonnegative")
        if not _finite(bs.radius) or bs.radius <= 0:
            bad(f"tier2[{i}].radius", "must be positive (km)")
        for j, cls in enumerate(bs.ue_classes):
            p = f"tier2[{i}].ue_classes[{j}]"
            if not _finite(cls.target_power) or cls.target_power <= 0:
                bad(p + ".target_power", "must be positive (linear mW)")
            prof = cls.profile
            if prof.kind not in IntensityProfile.KINDS:
                bad(p + ".profile.kind", f"unknown kind {prof.kind!r}")
                continue
            if not _finite(prof.support_radius) or prof.support_radius <= 0:
                bad(p + ".profile.support_radius", "must be positive (km)")
            elif _finite(bs.radius) and prof.support_radius > bs.radius + 1e-12:
                bad(
                    p + ".profile.support_radius",
                    f"support radius {prof.support_radius} exceeds the cell "
                    f"radius {bs.radius}",
                )
            if prof.kind == "tabulated":
                if len(prof.radii) != len(prof.densities) or len(prof.radii) < 2:
                    bad(p + ".profile", "tabulated profile needs matching "
                                        "radii/densities with >= 2 samples")
                else:
                    if any(r1 <= r0 for r0, r1 in zip(prof.radii, prof.radii[1:])):
                        bad(p + ".profile.radii", "must be strictly increasing")
                    if any(not _finite(d) or d < 0 for d in prof.densities):
                        bad(p + ".profile.densities", "must be nonnegative")
                    if any(not _finite(r) or r < 0 for r in prof.radii):
                        bad(p + ".profile.radii", "must be nonnegative")
            else:
                if not _finite(prof.amplitude) or prof.amplitude < 0:
                    bad(p + ".profile.amplitude", "must be nonnegative")

    ex = config.exclusion
    if ex.mode not in ExclusionConfig.MODES:
        bad("exclusion.mode", f"unknown mode {ex.mode!r}")
    elif ex.mode != "none":
        if ex.radius is None or not _finite(ex.radius) or ex.radius <= 0:
            bad("exclusion.radius", "must be positive (km)")
        elif _finite(config.hex_radius) and ex.radius >= config.hex_radius:
            bad("exclusion.radius",
                "must be smaller than the hexagon radius so exclusion disks "
                "do not cover whole cells")

    ac = config.access
    if ac.mode not in ("shared", "orthogonal"):
        bad("access.mode", f"unknown mode {ac.mode!r}")
    elif ac.mode == "orthogonal":
        if ac.blocks is None or int(ac.blocks) != ac.blocks or ac.blocks < 1:
            bad("access.blocks", "must be a positive integer")

    return out


def mean_ue_per_cell(bs_type: Tier2BSType, class_index: int) -> float:
    """Expected number of class-j UEs in one cell of this BS type."""
    if not 0 <= class_index < len(bs_type.ue_classes):
        raise IndexError(
            f"class index {class_index} out of range "
            f"(type has {len(bs_type.ue_classes)} classes)"
        )
    return bs_type.ue_classes[class_index].profile.mean_count()
