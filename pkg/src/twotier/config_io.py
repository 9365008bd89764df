"""TOML network-configuration files.

Schema (units in key names; powers in dBm at this boundary only):

    [network]
    hex_radius_km = 1.0           # macro cell circumradius, km

    [channel]
    pathloss_constant = 1.0       # A in A*d^gamma (cancels in SIRs)
    pathloss_exponent = 4.0       # gamma, > 2
    shadow_sigma_db = 4.0         # std of 10log10 of the shadowing ratio, dB

    [[tier1]]                     # one table per macro UE type
    intensity_per_km2 = 0.5       # lambda_i, points/km^2
    target_power_dbm = -70.0      # P_i

    [[tier2]]                     # one table per small-cell BS type
    intensity_per_km2 = 0.5       # mu_i, points/km^2
    radius_km = 0.2               # R_i, km
      [[tier2.ue_classes]]        # one per UE class of this type
      target_power_dbm = -70.0    # Q_ij
        [tier2.ue_classes.profile]
        kind = "constant"         # constant | rising | falling | tabulated
        density_per_km2 = 20.0    # constant: level; rising: edge peak;
                                  #   falling: center peak
        support_radius_km = 0.2   # optional, defaults to the cell radius
        # tabulated instead uses:
        # radii_km = [0.0, 0.1, 0.2]
        # densities_per_km2 = [30.0, 10.0, 0.0]

    [exclusion]
    mode = "none"                 # none | bs | ue
    radius_km = 0.3               # required unless mode = "none", km

    [access]
    mode = "shared"               # shared | orthogonal
    resource_blocks = 16          # required for orthogonal
"""
from __future__ import annotations

import hashlib
from dataclasses import asdict

try:
    import tomllib
except ModuleNotFoundError:                       # Python 3.10
    import tomli as tomllib

from .model import (
    AccessMode,
    ChannelParams,
    ExclusionConfig,
    IntensityProfile,
    NetworkConfig,
    Tier1UEType,
    Tier2BSType,
    Tier2UEClass,
    dbm_to_mw,
)


class ConfigError(ValueError):
    pass


def _profile_from_dict(d: dict, cell_radius: float) -> IntensityProfile:
    kind = d.get("kind", "constant")
    support = float(d.get("support_radius_km", cell_radius))
    if kind == "constant":
        return IntensityProfile.constant(float(d["density_per_km2"]), support)
    if kind == "rising":
        return IntensityProfile.rising(float(d["density_per_km2"]), support)
    if kind == "falling":
        return IntensityProfile.falling(float(d["density_per_km2"]), support)
    if kind == "tabulated":
        return IntensityProfile.tabulated(d["radii_km"], d["densities_per_km2"])
    raise ConfigError(f"unknown profile kind {kind!r}")


def parse_config(data: dict) -> NetworkConfig:
    try:
        net = data["network"]
        hex_radius = float(net["hex_radius_km"])
        ch = data.get("channel", {})
        channel = ChannelParams(
            pathloss_constant=float(ch.get("pathloss_constant", 1.0)),
            pathloss_exponent=float(ch.get("pathloss_exponent", 4.0)),
            shadow_sigma_db=float(ch.get("shadow_sigma_db", 4.0)),
        )
        tier1 = tuple(
            Tier1UEType(
                intensity=float(t["intensity_per_km2"]),
                target_power=dbm_to_mw(float(t["target_power_dbm"])),
            )
            for t in data.get("tier1", [])
        )
        tier2 = []
        for t in data.get("tier2", []):
            radius = float(t["radius_km"])
            classes = tuple(
                Tier2UEClass(
                    target_power=dbm_to_mw(float(c["target_power_dbm"])),
                    profile=_profile_from_dict(c.get("profile", {}), radius),
                )
                for c in t.get("ue_classes", [])
            )
            tier2.append(Tier2BSType(
                intensity=float(t["intensity_per_km2"]),
                radius=radius,
                ue_classes=classes,
            ))
        ex = data.get("exclusion", {"mode": "none"})
        mode = ex.get("mode", "none")
        exclusion = ExclusionConfig(
            mode, float(ex["radius_km"]) if mode != "none" else None)
        ac = data.get("access", {"mode": "shared"})
        if ac.get("mode", "shared") == "orthogonal":
            access = AccessMode.orthogonal(int(ac["resource_blocks"]))
        else:
            access = AccessMode.shared()
    except KeyError as err:
        raise ConfigError(f"missing config key {err.args[0]!r}") from err
    return NetworkConfig(
        hex_radius=hex_radius, channel=channel, tier1=tier1,
        tier2=tuple(tier2), exclusion=exclusion, access=access,
    )


def load_config(path) -> NetworkConfig:
    with open(path, "rb") as fh:
        return parse_config(tomllib.load(fh))


def canonical_text(config: NetworkConfig) -> str:
    """Deterministic flat rendering of a config, used for provenance hashes."""

    def flatten(prefix, obj, out):
        if isinstance(obj, dict):
            for key in sorted(obj):
                flatten(f"{prefix}.{key}" if prefix else key, obj[key], out)
        elif isinstance(obj, (list, tuple)):
            for idx, item in enumerate(obj):
                flatten(f"{prefix}[{idx}]", item, out)
        else:
            out.append(f"{prefix}={obj!r}")

    lines: list = []
    flatten("", asdict(config), lines)
    return "\n".join(lines) + "\n"


def config_hash(config: NetworkConfig) -> str:
    return hashlib.sha256(canonical_text(config).encode()).hexdigest()[:12]
