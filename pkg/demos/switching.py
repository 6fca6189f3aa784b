"""Regime switches of the optimal symmetric control as curing gets cheaper.

Scales the cost weights K1 and K2 down from 10 to 1e-3 and records where the
optimal regime changes. One scenario switches once, the other twice.
"""

import numpy as np

from epicure import CostModel, EpidemicParams, from_moments, predict_switching_pattern, symmetric_sweep

net = from_moments(1.996, 13.75)
cost = CostModel(15.0, 10.0, 50.0)
scales = np.geomspace(10.0, 1e-3, 61)

scenarios = {
    "single": EpidemicParams(zeta1=0.2, zeta2=0.15, gamma1=0.4, gamma2=0.4),
    "double": EpidemicParams(zeta1=0.1, zeta2=0.15, gamma1=0.1, gamma2=0.2),
}
for name, params in scenarios.items():
    pattern = predict_switching_pattern(net, params)
    profile = symmetric_sweep(net, params, cost, scales)
    print(f"{name}: predicted {pattern.kind}, fulfilling threshold {profile.fulfilling_threshold:.4f}")
    for tr in profile.transitions:
        print(f"  {tr.from_regime.label} -> {tr.to_regime.label} at u={tr.u:.4f} (scale {tr.scale:.3g})")
    for s in profile.samples[::10]:
        print(f"  scale={s.scale:8.4f}  u={s.u:.4f}  {s.regime.label}  J={s.objective:.4f}")
