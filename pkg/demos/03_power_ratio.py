"""Choosing the small-cell target power.

Raising Q/P helps the small-cell uplink (better cross-tier SIR at the
small cell) and hurts the macro uplink, so the population-average outage
has an interior optimum; only the two cross-tier terms move with the
ratio, which keeps the sweep cheap.
"""
import numpy as np

import twotier as tt

base = tt.load_config("configs/single_type.toml").with_(
    tier2=(tt.Tier2BSType(1.0, 0.2, (tt.Tier2UEClass(
        tt.dbm_to_mw(-70.0), tt.IntensityProfile.constant(20.0, 0.2)),)),))

print("average outage vs small-cell power advantage (T=0.1)")
print(f"{'Q/P dB':>7} {'avg outage':>11}")
curve = []
ratios = np.arange(0.0, 30.1, 2.5)
for ratio_db in ratios:
    q_mw = base.tier1[0].target_power * 10 ** (ratio_db / 10)
    cfg = base.with_(tier2=(tt.Tier2BSType(1.0, 0.2, (
        tt.Tier2UEClass(q_mw, base.tier2[0].ue_classes[0].profile),)),))
    avg = tt.average_outage(cfg, 0.1)
    curve.append(avg)
    print(f"{ratio_db:7.1f} {avg:11.4f}")
best = ratios[int(np.argmin(curve))]
print(f"\nminimum near {best:g} dB")
