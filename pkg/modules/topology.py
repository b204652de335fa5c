"""
Topological classification of the no-jump evolution.

The no-jump GP phi_0 is followed continuously along the polar angle from the
pole (where it vanishes mod 2pi) to the opposite pole; phi_0(pi)/2pi is an
integer that can only change across parameters where the no-jump path ends
orthogonal to its start.
"""

import logging
import math
from collections.abc import Sequence
from typing import Literal

import numpy as np

from models.params import ModelParams, grid_point
from models.topology import DeltaSweep, PhaseCell, SectorCell, ThetaSweep
from modules.core import inner, norm_squared, wrap_phase
from modules.echo import no_jump_echo
from modules.errors import SingularOverlap, SweepThroughSingularity
from modules.geometric_phase import gp_pancharatnam, no_jump_path
from modules.propagators import ANALYSIS_DT, PropagatorMethod

logger = logging.getLogger(__name__)

INITIAL_GRID = 64
MIN_THETA_STEP = 1e-7
MAX_STEP_PHASE = math.pi / 2
WINDING_TOL = 0.05
SINGULAR_OVERLAP_SQ = 1e-8


class _PhaseEvaluator:
    """Cached no-jump GP and normalized end overlap as functions of theta."""

    def __init__(self, p: ModelParams, dt: float = ANALYSIS_DT, method: PropagatorMethod = "magnus"):
        self.p = p
        self.dt = dt
        self.method = method
        self._cache: dict[float, tuple[float, float]] = {}

    def __call__(self, theta: float) -> tuple[float, float]:
        if theta not in self._cache:
            self._cache[theta] = self._evaluate(theta)
        return self._cache[theta]

    def _evaluate(self, theta: float) -> tuple[float, float]:
        path = no_jump_path(self.p.replace(theta=theta), method=self.method, dt=self.dt)
        start, end = path.states[0], path.states[-1]
        overlap = float(abs(inner(start, end)) / math.sqrt(float(norm_squared(end))))
        try:
            phase = gp_pancharatnam(path.states)
        except SingularOverlap:
            phase = math.nan
        return phase, overlap

    @property
    def evaluations(self) -> int:
        return len(self._cache)

    @property
    def thetas(self) -> list[float]:
        """Every angle evaluated so far, sorted."""
        return sorted(self._cache)


def _refine(
    evaluate: _PhaseEvaluator, thetas: list[float], min_step: float
) -> list[float]:
    """Bisect every interval whose wrapped phase step reaches pi/2."""
    refined = [thetas[0]]
    pending = list(zip(thetas[:-1], thetas[1:], strict=True))[::-1]
    while pending:
        a, b = pending.pop()
        phase_a, _ = evaluate(a)
        phase_b, overlap_b = evaluate(b)
        if math.isnan(phase_a) or math.isnan(phase_b):
            raise SweepThroughSingularity(
                f"no-jump GP undefined near theta={b / math.pi:.6f}pi (overlap {overlap_b:.3e})"
            )
        if abs(wrap_phase(phase_b - phase_a)) < MAX_STEP_PHASE:
            refined.append(b)
            continue
        if b - a <= min_step:
            raise SweepThroughSingularity(
                f"phase jumps by {wrap_phase(phase_b - phase_a):.3f} rad within "
                f"dtheta={b - a:.2e} at theta={a / math.pi:.6f}pi"
            )
        mid = 0.5 * (a + b)
        pending.extend([(mid, b), (a, mid)])
    return refined


def _unwrap(evaluate: _PhaseEvaluator, thetas: Sequence[float]) -> tuple[list[float], list[float], list[float]]:
    raw = [evaluate(theta)[0] for theta in thetas]
    overlaps = [evaluate(theta)[1] for theta in thetas]
    phases = [raw[0] - 2 * math.pi * round(raw[0] / (2 * math.pi))]
    for previous, current in zip(raw[:-1], raw[1:], strict=True):
        phases.append(phases[-1] + wrap_phase(current - previous))
    return phases, raw, overlaps


def _sweep(
    evaluate: _PhaseEvaluator, thetas: Sequence[float], omega_ratio: float, gamma_ratio: float
) -> ThetaSweep:
    phases, raw, overlaps = _unwrap(evaluate, thetas)
    return ThetaSweep(
        omega_ratio=omega_ratio,
        gamma_ratio=gamma_ratio,
        thetas=list(thetas),
        phases=phases,
        raw_phases=raw,
        overlaps=overlaps,
    )


def theta_sweep(
    p: ModelParams,
    n_initial: int = INITIAL_GRID,
    min_step: float = MIN_THETA_STEP,
    dt: float = ANALYSIS_DT,
    _evaluator: _PhaseEvaluator | None = None,
) -> ThetaSweep:
    """
    Follow phi_0 continuously over theta in [0, pi].

    Intervals are bisected while the wrapped phase step reaches pi/2.

    Args:
        p: Model parameters; theta is swept
        n_initial: Intervals of the starting grid
        min_step: Smallest interval before giving up
        dt: Magnus step of the no-jump propagation

    Raises:
        SweepThroughSingularity: If the phase cannot be made continuous
    """
    evaluate = _evaluator or _PhaseEvaluator(p, dt)
    thetas = _refine(evaluate, list(np.linspace(0.0, math.pi, n_initial + 1)), min_step)
    sweep = _sweep(evaluate, thetas, p.Omega / p.omega, p.Gamma / p.omega)
    logger.debug(
        f"theta sweep at Omega={p.Omega:.6g}, Gamma={p.Gamma:.6g}: {len(thetas)} points, "
        f"{evaluate.evaluations} evaluations, end winding {sweep.end_winding:.4f}"
    )
    return sweep


def winding_number(p: ModelParams, **sweep_kwargs) -> int:
    """
    phi_0(pi)/2pi rounded to the nearest integer.

    Raises:
        SweepThroughSingularity: If the sweep fails or ends more than 0.05 off an integer
    """
    sweep = theta_sweep(p, **sweep_kwargs)
    value = sweep.end_winding
    n = round(value)
    if abs(value - n) >= WINDING_TOL:
        raise SweepThroughSingularity(f"phi_0(pi)/2pi = {value:.4f} is not an integer")
    return int(n)


def delta_theta(
    p1: ModelParams, p2: ModelParams, n_initial: int = INITIAL_GRID, dt: float = ANALYSIS_DT
) -> DeltaSweep:
    """(phi_0^(1)(theta) - phi_0^(2)(theta))/2pi on the union of both adaptive grids."""
    first, second = _PhaseEvaluator(p1, dt), _PhaseEvaluator(p2, dt)
    sweep1 = theta_sweep(p1, n_initial, dt=dt, _evaluator=first)
    sweep2 = theta_sweep(p2, n_initial, dt=dt, _evaluator=second)
    thetas = sorted(set(sweep1.thetas) | set(sweep2.thetas))
    phases1, _, _ = _unwrap(first, thetas)
    phases2, _, _ = _unwrap(second, thetas)
    delta = [(a - b) / (2 * math.pi) for a, b in zip(phases1, phases2, strict=True)]
    return DeltaSweep(thetas=thetas, delta=delta)


def sector_map(
    theta_grid: Sequence[float],
    omega_grid: Sequence[float],
    gamma_grid: Sequence[float],
    *,
    base: ModelParams | None = None,
    dt: float = ANALYSIS_DT,
) -> list[SectorCell]:
    """
    Winding number over a grid of (Omega/omega, Gamma/omega).

    theta_grid seeds every sweep. A cell is singular when the sweep fails or the
    squared no-jump overlap drops below 1e-8 at some theta; the critical theta is
    where the overlap is smallest. Every cell inherits the channel mix,
    displacement and drive direction of base (see ModelParams.at_ratios).
    """
    grid = sorted(float(theta) for theta in theta_grid)
    if len(grid) < 2 or grid[0] != 0.0 or not math.isclose(grid[-1], math.pi):
        raise ValueError("theta_grid must run from 0 to pi")
    cells = []
    for omega_ratio in omega_grid:
        for gamma_ratio in gamma_grid:
            p = grid_point(base, omega_ratio, gamma_ratio, 0.0, dt)
            evaluate = _PhaseEvaluator(p, dt)
            winding = None
            try:
                sweep = _sweep(evaluate, _refine(evaluate, grid, MIN_THETA_STEP), omega_ratio, gamma_ratio)
                value = sweep.end_winding
                if abs(value - round(value)) < WINDING_TOL:
                    winding = int(round(value))
            except SweepThroughSingularity as e:
                logger.info(f"cell Omega/omega={omega_ratio:.6g}, Gamma/omega={gamma_ratio:.6g}: {e}")
            thetas = evaluate.thetas
            overlaps = [evaluate(theta)[1] for theta in thetas]
            index = int(np.argmin(overlaps))
            singular = winding is None or overlaps[index] ** 2 < SINGULAR_OVERLAP_SQ
            cells.append(
                SectorCell(
                    omega_ratio=omega_ratio,
                    gamma_ratio=gamma_ratio,
                    winding=None if singular else winding,
                    singular=singular,
                    critical_theta=thetas[index],
                    min_overlap=overlaps[index],
                )
            )
    return cells


def phase_map(
    theta: float,
    omega_grid: Sequence[float],
    gamma_grid: Sequence[float],
    *,
    base: ModelParams | None = None,
    dt: float = ANALYSIS_DT,
) -> list[PhaseCell]:
    """No-jump GP over an (Omega/omega, Gamma/omega) grid at fixed theta, channels as in base."""
    cells = []
    for omega_ratio in omega_grid:
        for gamma_ratio in gamma_grid:
            p = grid_point(base, omega_ratio, gamma_ratio, theta, dt)
            phase, overlap = _PhaseEvaluator(p, dt)(p.theta)
            singular = math.isnan(phase) or overlap**2 < SINGULAR_OVERLAP_SQ
            cells.append(
                PhaseCell(
                    omega_ratio=omega_ratio,
                    gamma_ratio=gamma_ratio,
                    phase=None if singular else phase,
                    overlap=overlap,
                    singular=singular,
                )
            )
    return cells


def loop_winding(
    theta: float,
    center: tuple[float, float],
    radii: tuple[float, float],
    n_points: int = 16,
    *,
    base: ModelParams | None = None,
    dt: float = ANALYSIS_DT,
) -> float:
    """
    Total wrapped change of phi_0 around an ellipse in (Omega/omega, Gamma/omega).

    Returns:
        Sum of wrapped increments over the closed loop (rad); a multiple of 2pi
        when the loop avoids singular points

    Raises:
        SweepThroughSingularity: If phi_0 is undefined on the loop
    """
    if n_points < 3:
        raise ValueError(f"a loop needs at least 3 points, got {n_points}")
    angles = 2 * math.pi * np.arange(n_points) / n_points
    phases = []
    for angle in angles:
        omega_ratio = center[0] + radii[0] * math.cos(angle)
        gamma_ratio = center[1] + radii[1] * math.sin(angle)
        p = grid_point(base, omega_ratio, gamma_ratio, theta, dt)
        phase, overlap = _PhaseEvaluator(p, dt)(p.theta)
        if math.isnan(phase):
            raise SweepThroughSingularity(
                f"phi_0 undefined on the loop at ({omega_ratio:.6g}, {gamma_ratio:.6g})"
            )
        phases.append(phase)
    closed = [*phases, phases[0]]
    return float(sum(wrap_phase(b - a) for a, b in zip(closed[:-1], closed[1:], strict=True)))


def echo_transect(
    p: ModelParams,
    axis: Literal["omega", "gamma"],
    values: Sequence[float],
    dt: float = ANALYSIS_DT,
) -> list[tuple[float, float]]:
    """
    No-jump echo varphi along Omega/omega or Gamma/omega with everything else
    in p fixed; Gamma-proportional rates follow Gamma on the gamma axis.

    Returns:
        (value, varphi) pairs in input order
    """
    if axis not in ("omega", "gamma"):
        raise ValueError(f"axis must be 'omega' or 'gamma', got {axis!r}")
    omega_ratio, gamma_ratio = p.Omega / p.omega, p.Gamma / p.omega
    transect = []
    for value in values:
        point = grid_point(
            p,
            value if axis == "omega" else omega_ratio,
            value if axis == "gamma" else gamma_ratio,
            p.theta,
            dt,
        )
        transect.append((float(value), no_jump_echo(point, dt=dt).varphi))
    return transect
