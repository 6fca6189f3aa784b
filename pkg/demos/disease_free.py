"""Cheapest control that removes both strains, against the infection rate.

The disease-free control depends on the network only through <k^2>/<k>, so two
different degree distributions with matched moments give the same answer.
"""

import numpy as np

from epicure import CostModel, DegreeDistribution, EpidemicParams, from_moments, solve_disease_free

cost = CostModel(15.0, 10.0, 50.0)
net = from_moments(1.996, 13.75)

# a second pmf with the same two moments, on support {1, 2, 20}
support = np.array([1.0, 2.0, 20.0])
probs = np.linalg.solve(np.vstack([np.ones(3), support, support**2]), [1.0, 1.996, 13.75])
pmf = np.zeros(21)
pmf[[1, 2, 20]] = probs
other = DegreeDistribution(pmf / pmf.sum())

print("zeta    u1(I)   u2(I)   cost(I)  u2(II)  cost(II)  same on other pmf")
for zeta in np.linspace(0.1, 1.0, 10):
    a = solve_disease_free(net, EpidemicParams(zeta, zeta, 0.5, 0.3))
    b = solve_disease_free(net, EpidemicParams(zeta, zeta, 0.5, 0.8))
    o = solve_disease_free(other, EpidemicParams(zeta, zeta, 0.5, 0.3))
    same = np.allclose([a.u1, a.u2], [o.u1, o.u2], rtol=0.0, atol=1e-12)
    ca = cost.K1 * a.u1 + cost.K2 * a.u2
    cb = cost.K1 * b.u1 + cost.K2 * b.u2
    print(f"{zeta:4.2f}  {a.u1:6.3f}  {a.u2:6.3f}  {ca:7.3f}  {b.u2:6.3f}  {cb:8.3f}  {same}")
