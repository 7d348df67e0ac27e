#!/usr/bin/env python3
"""Soft-logic connective arithmetic.

Truth values live in [0, 1].  Disjunction is a capped sum, the averaging
conjunction keeps partial evidence alive, the hard conjunction demands that
the combined evidence exceed the slack, negation complements.
"""

import numpy as np

from logicdec import and_avg_vec, and_luk_vec, not_vec, or_vec

print("Boolean corner cases")
print("p q | or and-hard")
for p in (0.0, 1.0):
    for q in (0.0, 1.0):
        a, b = np.array([p]), np.array([q])
        print(f"{p:.0f} {q:.0f} | {or_vec([a, b])[0]:.0f}  {and_luk_vec([a, b])[0]:.0f}")

print("\nSoft values: p=0.3, q=0.5")
a, b = np.array([0.3]), np.array([0.5])
print("or      =", or_vec([a, b])[0])        # 0.8
print("and-avg =", and_avg_vec([a, b])[0])   # 0.4
print("and-hard=", and_luk_vec([a, b])[0])   # 0.0 -- evidence too weak
print("not p   =", not_vec(a)[0])            # 0.7

print("\nThe averaging conjunction is deliberately not Boolean:")
print("and_avg(0, 1) =", and_avg_vec([np.array([0.0]), np.array([1.0])])[0])

print("\nEverything is vectorized; one call evaluates a whole vocabulary:")
rng = np.random.default_rng(0)
p, q = rng.random(8).round(2), rng.random(8).round(2)
print("p        =", p)
print("q        =", q)
print("p or q   =", or_vec([p, q]).round(2))
print("p avg q  =", and_avg_vec([p, q]).round(2))
print("p hard q =", and_luk_vec([p, q]).round(2))
