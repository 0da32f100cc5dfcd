"""
Composition accounting: RDP route vs strong-composition baseline
================================================================

Composes T identical subsampled-shuffle rounds and converts to
(eps, delta)-DP two ways:

* ours: compose the RDP upper bound order-by-order, then minimize the
  conversion penalty over the order;
* baseline: closed-form shuffle amplification per round (with its
  degenerate fallback), subsampling amplification, strong composition.

Reproduces the headline operating point (eps0=2, gamma=1e-3, n=1e6,
T=1e5, delta=1e-8) where the RDP route saves roughly 14x.
"""

from shuffle_rdp import (
    AccountantConfig,
    SubsampledShuffleParams,
    baseline_total,
    blanket_condition_ok,
    clones_condition_ok,
    compose,
    rdp_to_dp,
    rdp_upper_curve,
    total_privacy,
)


def banner(title):
    print()
    print("=" * 64)
    print(title)
    print("=" * 64)


banner("1. Composing a tabulated curve by hand")
params = SubsampledShuffleParams(n=10**6, k=1000, eps0=2.0)
curve = rdp_upper_curve(params, range(2, 65))
composed = compose(curve, 10_000)
g = rdp_to_dp(composed, 1e-8)
print(f"T=1e4 rounds, delta=1e-8: eps = {g.eps:.4f} at order lambda = {g.argmin_lambda}")

banner("2. One-call accounting with the order search")
for T in (10**3, 10**4, 10**5):
    g = total_privacy(params, AccountantConfig(T=T, delta=1e-8))
    print(f"T={T:>7}: eps = {g.eps:.4f}  (argmin lambda = {g.argmin_lambda})")
print("Budget grows far slower than the round count: that is the point of")
print("composing in the RDP domain.")

banner("3. The baseline pipeline and the headline ratio")
T, delta = 10**5, 1e-8
ours = total_privacy(params, AccountantConfig(T=T, delta=delta))
base = baseline_total(params, T, delta)
print(f"ours:     eps = {ours.eps:.4f}")
print(f"baseline: eps = {base.eps:.4f}  (shuffle step degenerate: {base.degenerate})")
print(f"savings:  {base.eps / ours.eps:.1f}x")

banner("4. Validity conditions of the amplification bounds")
for eps0 in (1.0, 2.0, 3.0):
    c = clones_condition_ok(eps0, params.k, delta)
    b = blanket_condition_ok(eps0, params.k, delta)
    print(f"eps0={eps0}: clones condition {c}, blanket condition {b}")
print("When the conditions fail, the per-round shuffle step falls back to")
print("the raw (eps0, 0) guarantee before subsampling and composition.")
