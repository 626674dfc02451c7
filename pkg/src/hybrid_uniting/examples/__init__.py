"""Worked examples: a nonlinear plant with limited measurements, and a point
mass steered around an obstacle."""
