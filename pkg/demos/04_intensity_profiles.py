"""Where small-cell users sit inside their cell changes everything.

Three radial profiles with the same per-cell user count: edge-heavy
users power-control over a longer distance, so they transmit louder and
raise outage at both tiers; center-heavy users do the opposite.
"""
import twotier as tt

profiles = {
    "center-heavy 60(R-r)/R": tt.IntensityProfile.falling(60.0, 0.2),
    "uniform 20": tt.IntensityProfile.constant(20.0, 0.2),
    "edge-heavy 30 r/R": tt.IntensityProfile.rising(30.0, 0.2),
}

base = tt.load_config("configs/single_type.toml")
print("same mean load per cell "
      f"({profiles['uniform 20'].mean_count():.3f} UEs), different placement\n")
print(f"{'profile':>24} {'tier-1 outage':>14} {'tier-2 outage':>14}")
for name, prof in profiles.items():
    cfg = base.with_(tier2=(tt.Tier2BSType(0.5, 0.2, (
        tt.Tier2UEClass(tt.dbm_to_mw(-70.0), prof),)),))
    p1 = tt.outage_tier1(cfg, tt.TypicalQuery.tier1(0, 0.1))
    p2 = tt.outage_tier2(cfg, tt.TypicalQuery.tier2(0, 0, 0.1))
    print(f"{name:>24} {p1:14.4f} {p2:14.4f}")
