"""Compact-difference solvers for the 2D periodic viscous Burgers' equation.

Two schemes are provided: a nonlinear Crank-Nicolson compact scheme advanced
by fixed-point iteration, and a three-stage space-time two-grid variant that
solves the nonlinear problem only on a coarse mesh, transfers the solution by
linear-in-time / bicubic-in-space interpolation, and corrects it with one
linearized compact solve per fine step.  A config-driven CLI reproduces
convergence tables and scheme-versus-scheme timing comparisons.
"""

__version__ = "0.1.0"
