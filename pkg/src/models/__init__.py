from src.models.params import BoundaryKind, ItoVariant, ModelParams, SchemeParams, TrancheSpec
from src.models.grid import Grid
from src.models.field import SolutionField
from src.models.path import BrownianPath
from src.models.results import (
    ErrorEstimate,
    LevelEstimate,
    ModeDecayEstimate,
    ParticleResult,
    StabilityReport,
)
