"""
Numerical library and shared infrastructure for gp-trajectories.
"""
