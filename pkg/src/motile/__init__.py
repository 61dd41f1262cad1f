"""Curve-shortening flow with a nonlocal motility term and volume preservation.

Modules: ``geometry`` (discrete closed curves), ``phi`` (the kernel and its
critical coupling), ``interface_solver`` (the front-tracking scheme),
``graph_solver`` (normal-graph formulation on a reference circle),
``traveling_wave`` (shooting for translating profiles) and ``experiments``
(convergence and drift studies).
"""

__version__ = "0.1.0"
