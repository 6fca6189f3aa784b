"""Designing the disease-free control on the wrong network.

A control tuned to a network with smaller <k^2> leaves a strain alive on a
network with larger <k^2>; the reverse direction over-spends but succeeds.
"""

from epicure import EpidemicParams, cross_apply, from_moments

params = EpidemicParams(zeta1=0.3, zeta2=0.3, gamma1=0.5, gamma2=0.3)
large = from_moments(1.996, 12.396)
small = from_moments(1.996, 10.36)

report = cross_apply(large, small, params).to_dict()
print("design for large <k^2>:", report["design_a"])
print("design for small <k^2>:", report["design_b"])
for key, label in (
    ("a_under_a", "large design on large net"),
    ("b_under_b", "small design on small net"),
    ("a_under_b", "small design on large net"),
    ("b_under_a", "large design on small net"),
):
    entry = report[key]
    print(f"{label:28s} {entry['regime']:16s} Ibar=({entry['ibar1']:.4f}, {entry['ibar2']:.4f})")
