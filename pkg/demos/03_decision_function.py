#!/usr/bin/env python3
"""The decision function: shifting a distribution toward rule-approved words.

Entry i of the output is proportional to p_i * exp(alpha * truth_i * p_i).
The original probability gates the boost, so the rules amplify viable
candidates instead of resurrecting hopeless ones.
"""

import numpy as np

from logicdec import decide

p = np.array([0.50, 0.30, 0.15, 0.05])
labels = ["house", "garden", "road", "piano"]

print("original distribution:")
for w, pi in zip(labels, p):
    print(f"  {w:<8} {pi:.3f}")

truth = np.array([0.0, 1.0, 0.0, 1.0])   # the rules like garden and piano
for alpha in (0.0, 4.0, 12.0, 24.0):
    shifted = decide(p, truth, alpha)
    row = "  ".join(f"{w}={v:.3f}" for w, v in zip(labels, shifted))
    print(f"alpha={alpha:>4}:  {row}")

print("\nNote the asymmetry: garden (p=0.30) overtakes house long before")
print("piano (p=0.05) becomes competitive -- the boost scales with p.")

print("\nidentity cases reproduce the input exactly:")
print("  zero truth :", decide(p, np.zeros(4), 24.0))
print("  zero alpha :", decide(p, truth, 0.0))

print("\nzero-probability entries can never be resurrected:")
p0 = np.array([0.0, 0.6, 0.4])
print("  ", decide(p0, np.array([1.0, 0.0, 0.0]), 50.0))
