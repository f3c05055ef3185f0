"""Cheapest treaty that keeps the retained Value-at-Risk at the budget.

The contract cedes the layer above v* = c only on the states where doing so
is cheap (q(x) <= d) and leaves the rest, a set of probability alpha,
uncovered.
Run: python demos/02_var_constrained.py [--alpha 0.05] [--budget 2]
"""

import argparse

import numpy as np

from reot.contracts import retained_tail, retained_value_at_risk_check, solve_var_constrained
from reot.dist import Uniform, standard_gamma, standard_pareto

ap = argparse.ArgumentParser()
ap.add_argument("--alpha", type=float, default=0.05)
ap.add_argument("--budget", type=float, default=2.0)
args = ap.parse_args()

print("one line, Uniform(0, 1), alpha = 0.1, c = 0.5")
c1, r1 = solve_var_constrained([Uniform(0.0, 1.0)], (1.0,), 0.1, 0.5)
print(f"  v* = {c1.v_star}, d = {c1.d:.9f}")
for x in (0.3, 0.6, 0.9, 0.95):
    print(f"  R({x}) = {float(c1.reinsured(np.array([x]))[0]):.3f}")
print(f"  P(retained > v*) = {retained_tail(c1, [Uniform(0.0, 1.0)], 0.5):.6f}")

dists = [standard_gamma(), standard_pareto()]
print(f"\ntwo lines, beta = (0.1, 0.25), alpha = {args.alpha}, c = {args.budget}")
c2, r2 = solve_var_constrained(dists, (0.1, 0.25), args.alpha, args.budget)
print(f"  VaR of the total claim   = {r2.extra['sum_value_at_risk']:.6f}")
print(f"  v* = {c2.v_star}, d = {c2.d:.6f}, covered probability = {r2.extra['coverage']:.9f}")
print(f"  expected loading         = {r2.objective:.6f}")
ok, info = retained_value_at_risk_check(c2, dists, args.alpha)
print(f"  VaR(retained) = v*: {ok}  (tail at v* {info['tail_at_v']:.6f}, just below {info['tail_below_v']:.6f})")
