"""The two statistics behind every significance call, worked by hand."""
import numpy as np

from clusterexplain.sfit import binom_test_greater, ci_indices, median_ci

# --- One-sided sign test ---
# 60 of 100 loss differences positive: how surprising under a fair coin?
print("P(X >= 60), X ~ Bin(100, 1/2) =", binom_test_greater(60, 100))
print("all 10 positive                 =", binom_test_greater(10, 10), "= 2**-10")
print("none positive                   =", binom_test_greater(0, 10))

# --- Order statistics bracketing the median ---
for n in (25, 77, 100, 500):
    print(f"n = {n:3d}: 95% interval between order statistics {ci_indices(n, 0.05)}")

# --- How often does the interval catch the true median? ---
rng = np.random.default_rng(0)
hits = 0
for _ in range(1000):
    lo, hi, _, _ = median_ci(rng.standard_normal(100), 0.05)
    hits += lo <= 0.0 <= hi
print(f"coverage over 1000 normal samples of 100: {hits / 1000:.3f}")
