from dataclasses import dataclass, asdict
from enum import Enum
from typing import Any, Dict
import math

from src.errors import require


class ItoVariant(str, Enum):
    COMPACT = 'compact'     # second différence compacte D2
    ITERATED = 'iterated'   # différence première itérée D1², pas 2h


class BoundaryKind(str, Enum):
    DIRICHLET = 'dirichlet'
    PERIODIC = 'periodic'


@dataclass(frozen=True)
class ModelParams:
    """
    Coefficients de l'EDPS dv = -mu v_x dt + 1/2 v_xx dt - sqrt(rho) v_x dM,
    point initial, domaine tronqué et horizon.
    """
    mu: float = 0.081
    rho: float = 0.2
    x0: float = 5.0
    x_lo: float = -16.0 / 3.0
    x_hi: float = 16.0
    T: float = 5.0

    def __post_init__(self):
        require(0.0 <= self.rho < 1.0, f'rho doit être dans [0, 1), reçu {self.rho}')
        require(self.x_lo < self.x0 < self.x_hi,
                f'x0={self.x0} doit être strictement dans ]{self.x_lo}, {self.x_hi}[')
        require(self.T > 0.0, f'T doit être positif, reçu {self.T}')
        require(math.isfinite(self.mu), 'mu doit être fini')

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def __repr__(self):
        return f'<ModelParams mu={self.mu} rho={self.rho} x0={self.x0} [{self.x_lo}, {self.x_hi}] T={self.T}>'


@dataclass(frozen=True)
class SchemeParams:
    """
    Poids theta (dérive) et sigma (partie déterministe de l'intégrale d'Itô double),
    variante du terme d'Itô et type de condition aux limites.
    """
    theta: float = 0.5
    sigma: float = -1.0
    ito_variant: ItoVariant = ItoVariant.COMPACT
    bc: BoundaryKind = BoundaryKind.DIRICHLET

    def __post_init__(self):
        require(0.0 <= self.theta <= 1.0, f'theta doit être dans [0, 1], reçu {self.theta}')
        require(-1.0 <= self.sigma <= 1.0, f'sigma doit être dans [-1, 1], reçu {self.sigma}')
        object.__setattr__(self, 'ito_variant', ItoVariant(self.ito_variant))
        object.__setattr__(self, 'bc', BoundaryKind(self.bc))

    @property
    def label(self) -> str:
        if self.theta == 0.0 and self.sigma == 0.0:
            return 'expl'
        if self.theta == 1.0 and self.sigma == 0.0:
            return 'impl'
        if self.theta == 0.5 and self.sigma == -1.0:
            return 'CN'
        return f'theta={self.theta:g},sigma={self.sigma:g}'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'theta': self.theta,
            'sigma': self.sigma,
            'ito_variant': self.ito_variant.value,
            'bc': self.bc.value,
        }

    def __repr__(self):
        return f'<SchemeParams {self.label} {self.ito_variant.value} {self.bc.value}>'


@dataclass(frozen=True)
class TrancheSpec:
    """Tranche [a, d] payée trimestriellement jusqu'à la maturité T = n q."""
    a: float = 0.0
    d: float = 0.03
    r: float = 0.042
    q: float = 0.25
    n: int = 20

    def __post_init__(self):
        require(0.0 <= self.a < self.d <= 1.0,
                f'il faut 0 <= a < d <= 1, reçu a={self.a}, d={self.d}')
        require(self.r >= 0.0, f'le taux r doit être positif, reçu {self.r}')
        require(self.q > 0.0 and self.n >= 1, 'intervalle de paiement et nombre de paiements invalides')

    @property
    def T(self) -> float:
        return self.n * self.q

    def payment_times(self):
        return [i * self.q for i in range(self.n + 1)]

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), 'T': self.T}

    def __repr__(self):
        return f'<TrancheSpec [{self.a}, {self.d}] r={self.r} q={self.q} n={self.n}>'
