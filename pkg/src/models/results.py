from dataclasses import dataclass, field
from typing import Any, Dict, Optional
import math

import numpy as np


@dataclass
class StabilityReport:
    """Verdict de stabilité en moyenne quadratique pour (rho, theta, sigma, k, h)."""
    f_value: float
    max_ratio: float
    unconditional: bool
    ratio: float
    stable: bool
    sup_gain: float
    gains: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'f': self.f_value,
            'limit': None if math.isinf(self.max_ratio) else self.max_ratio,
            'unconditional': self.unconditional,
            'ratio': self.ratio,
            'stable': self.stable,
            'sup_gain': self.sup_gain,
        }


@dataclass
class LevelEstimate:
    """Statistiques de l'estimateur Y_l (différence couplée P_l - P_{l-1})."""
    level: int
    n_samples: int
    mean: float
    variance: float
    cost: float = 0.0
    alpha: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.n_samples)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'level': self.level,
            'alpha': self.alpha,
            'N_l': self.n_samples,
            'mean_Yl': self.mean,
            'V_l': self.variance,
            'stderr': self.stderr,
            'cost': self.cost,
            **self.diagnostics,
        }

    def __repr__(self):
        return f'<LevelEstimate l={self.level} N={self.n_samples} mean={self.mean:.6g} V={self.variance:.6g}>'


@dataclass
class ErrorEstimate:
    """Erreur quadratique moyenne L2 (au carré) et son erreur Monte Carlo."""
    level: int
    h: float
    k: float
    value: float
    stderr: float
    n_samples: int


@dataclass
class ModeDecayEstimate:
    """Taux de croissance empirique (E|X_n|^2)^(1/n) d'un mode de Fourier."""
    rate: float
    stderr: float
    n_steps: int
    n_samples: int


@dataclass
class ParticleResult:
    """Densité empirique sur la grille du solveur et fraction absorbée en 0."""
    edges: np.ndarray
    density: np.ndarray
    absorbed_fraction: float
    stderr: float
    n_particles: int
