"""
Experiment modes run by the gp-trajectories command line.
"""
