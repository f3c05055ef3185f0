"""Optimal reinsurance by optimal-transport methods.

Modules
-------
dist       claim laws and their equal-width discretization
measures   mean, variance and Value-at-Risk of discrete laws
treaty     discrete treaties, dominance, comonotone couplings, support checks
contracts  parametric optimal contracts and parameter fitting
lp         standard-form LPs and a two-phase revised simplex
mmot       the two-line multi-marginal transport problem
oracle     brute-force and Monte Carlo cross-checks
cli        the ``reot`` command
"""

__version__ = "0.1.0"
