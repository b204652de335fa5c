"""Shared data models for gp-trajectories."""

from models.analytic import ReferencePhases, RotFrameParams
from models.echo import EchoCategory, EchoEnsemble, EchoOutcome
from models.experiment import (
    ExperimentConfig,
    ExperimentMode,
    GridSpec,
    ModeResult,
    OutputSpec,
    ParameterSpec,
    RunManifest,
    SweepSpec,
)
from models.histogram import CircularHistogram, Peak
from models.params import ModelParams
from models.states import DensityMatrix, EigenPair, LindbladPath, PureState
from models.topology import DeltaSweep, PhaseCell, SectorCell, ThetaSweep
from models.trajectory import (
    EnsembleResult,
    GpAccumulator,
    JumpChannel,
    JumpEvent,
    NoJumpRecord,
    TrajectoryRecord,
)

__all__ = [
    "CircularHistogram",
    "DeltaSweep",
    "DensityMatrix",
    "EchoCategory",
    "EchoEnsemble",
    "EchoOutcome",
    "EigenPair",
    "EnsembleResult",
    "ExperimentConfig",
    "ExperimentMode",
    "GpAccumulator",
    "GridSpec",
    "JumpChannel",
    "JumpEvent",
    "LindbladPath",
    "ModeResult",
    "ModelParams",
    "NoJumpRecord",
    "OutputSpec",
    "ParameterSpec",
    "Peak",
    "PhaseCell",
    "PureState",
    "ReferencePhases",
    "RotFrameParams",
    "RunManifest",
    "SectorCell",
    "SweepSpec",
    "ThetaSweep",
    "TrajectoryRecord",
]
