"""How many small cells can the operator deploy?

The tier-2 interference transform is exp(-sum_i mu_i C_i(s)), so every
outage cap becomes one linear constraint on the deployment intensities.
The operator's concave income is then maximised over a polytope.
"""
import numpy as np

import twotier as tt

cfg = tt.load_config("configs/planning.toml")
targets = [0.1, 0.1]
system = tt.build_tradeoff(cfg, sir_threshold=0.05, targets_tier1=targets)

print("linear intensity tradeoff (tier-1 outage caps at 0.1):")
G, h, labels = system.stacked()
for r, label in enumerate(labels):
    terms = " + ".join(f"{G[r, i]:.4f}*mu{i + 1}" for i in range(G.shape[1]))
    print(f"  {label}: {terms} <= {h[r]:.4f}")

utilities = [tt.UtilitySpec.scaled_log(1.5, 10.0),
             tt.UtilitySpec.scaled_log(1.0, 10.0)]
result = tt.solve(system, utilities)
print()
print(tt.planner.solution_report(result, system))

# close the loop: the caps hold exactly at the optimum
cfg_star = cfg.with_(tier2=tuple(
    tt.Tier2BSType(float(m), bs.radius, bs.ue_classes)
    for bs, m in zip(cfg.tier2, result.mu)))
for j, cap in enumerate(targets):
    p = tt.outage_tier1(cfg_star, tt.TypicalQuery.tier1(j, 0.05))
    print(f"outage of tier-1 type {j + 1} at mu*: {p:.6f} (cap {cap})")

# two-type feasibility frontier
grid = np.linspace(0.0, 1.5, 4)
front = tt.max_mu2_given_mu1(system, grid)
print("\nfeasibility frontier (max mu2 per mu1):",
      ", ".join(f"{a:.2f}->{b:.3f}" for a, b in zip(grid, front)))
