#!/usr/bin/env python3
"""
Experiment modes for the gp-trajectories command line.

Implementations are in the modes/ directory for easy individual testing.
Each mode file contains both the implementation and its MODE_DEFINITION.
"""

from modes.delta_theta import MODE_DEFINITION as DELTA_THETA_DEF
from modes.delta_theta import delta_theta
from modes.echo_dist import MODE_DEFINITION as ECHO_DIST_DEF
from modes.echo_dist import echo_dist
from modes.echo_vs_omega import MODE_DEFINITION as ECHO_VS_OMEGA_DEF
from modes.echo_vs_omega import echo_vs_omega
from modes.gp_dist import MODE_DEFINITION as GP_DIST_DEF
from modes.gp_dist import gp_dist
from modes.gp_vs_omega import MODE_DEFINITION as GP_VS_OMEGA_DEF
from modes.gp_vs_omega import gp_vs_omega
from modes.lindblad_check import MODE_DEFINITION as LINDBLAD_CHECK_DEF
from modes.lindblad_check import lindblad_check
from modes.no_jump_gp import MODE_DEFINITION as NO_JUMP_GP_DEF
from modes.no_jump_gp import no_jump_gp
from modes.phase_diagram import MODE_DEFINITION as PHASE_DIAGRAM_DEF
from modes.phase_diagram import phase_diagram
from modes.sector_map import MODE_DEFINITION as SECTOR_MAP_DEF
from modes.sector_map import sector_map
from modes.unravel_compare import MODE_DEFINITION as UNRAVEL_COMPARE_DEF
from modes.unravel_compare import unravel_compare

# Mode definitions, imported from the individual mode files
MODES = [
    GP_DIST_DEF,
    GP_VS_OMEGA_DEF,
    ECHO_DIST_DEF,
    ECHO_VS_OMEGA_DEF,
    NO_JUMP_GP_DEF,
    PHASE_DIAGRAM_DEF,
    SECTOR_MAP_DEF,
    DELTA_THETA_DEF,
    LINDBLAD_CHECK_DEF,
    UNRAVEL_COMPARE_DEF,
]

MODE_DEFINITIONS = {definition["name"]: definition for definition in MODES}

# Mode execution mapping
MODE_FUNCTIONS = {
    "gp-dist": gp_dist,
    "gp-vs-omega": gp_vs_omega,
    "echo-dist": echo_dist,
    "echo-vs-omega": echo_vs_omega,
    "no-jump-gp": no_jump_gp,
    "phase-diagram": phase_diagram,
    "sector-map": sector_map,
    "delta-theta": delta_theta,
    "lindblad-check": lindblad_check,
    "unravel-compare": unravel_compare,
}
