"""
Exact brute-force oracles
=========================

Desk-scale ground truth: the exact output law of the shuffler under
binary randomized response, exact histogram laws for arbitrary discrete
randomizers, and exact Renyi / ternary divergences.  Every closed-form
bound in the package is validated against these.
"""

import numpy as np

from shuffle_rdp import (
    SubsampledShuffleParams,
    exact_rdp_2rr_subshuffle,
    exact_renyi,
    exact_shuffle_dist,
    exact_ternary,
    rdp_lower,
    rr2_dists,
    zeta_shuffle,
)
from shuffle_rdp.checks import ALL_CHECKS
from shuffle_rdp.oracle import random_ldp_triple


def banner(title):
    print()
    print("=" * 64)
    print(title)
    print("=" * 64)


banner("1. Binary randomized response through the shuffler")
mu0, mu1 = rr2_dists(5, eps0=1.0)
print("law of the ones-count, all-zeros inputs:   ", np.round(mu0.probs, 4))
print("law of the ones-count, one flipped input:  ", np.round(mu1.probs, 4))

banner("2. The lower bound is exact for this instance")
params = SubsampledShuffleParams(n=500, k=50, eps0=1.0)
print(f"{'lambda':>7} {'closed form':>16} {'exact oracle':>16} {'rel gap':>10}")
for lam in (2, 4, 8, 16):
    lb = rdp_lower(lam, params)
    ex = exact_rdp_2rr_subshuffle(lam, params)
    print(f"{lam:>7} {lb:>16.9e} {ex:>16.9e} {abs(lb - ex) / ex:>10.1e}")

banner("3. Histogram laws for arbitrary discrete randomizers")
rng = np.random.default_rng(0)
dists = [rng.dirichlet(np.ones(3)) for _ in range(4)]
hist = exact_shuffle_dist(dists, B=3)
print(f"4 clients, 3 bins -> {len(hist.probs)} reachable histograms, "
      f"total mass {sum(hist.probs.values()):.12f}")
top = sorted(hist.probs.items(), key=lambda kv: -kv[1])[:3]
for h, p in top:
    print(f"  histogram {h}: probability {p:.4f}")

banner("4. Exact divergences vs the ternary bound")
eps0, k = 1.0, 8
p, p1, p2 = random_ldp_triple(2, eps0, np.random.default_rng(1))
shared = [p] * (k - 1)
P = exact_shuffle_dist(shared + [p], 2)
Q = exact_shuffle_dist(shared + [p1], 2)
R = exact_shuffle_dist(shared + [p2], 2)
print(f"{'alpha':>6} {'exact ternary':>16} {'zeta_shuffle bound':>20}")
for alpha in (2, 3, 4):
    div = exact_ternary(P, Q, R, alpha)
    bound = zeta_shuffle(alpha, k, eps0).value
    print(f"{alpha:>6} {div:>16.6e} {bound:>20.6e}")
print(f"Renyi divergence D_2(P || R) for the same laws: {exact_renyi(P, R, 2.0):.6e}")

banner("5. The named invariant suites")
for name in ("sandwich", "exact2rr", "ternary", "monotone", "convexity"):
    print(ALL_CHECKS[name]().summary())
