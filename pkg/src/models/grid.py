from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Grille de calcul à pas constant h en coordonnée y = x**alpha.

    Pour alpha = 1, y = x et la grille est uniforme en x. Les tableaux de
    coefficients (une entrée par noeud intérieur) ne sont renseignés que pour
    les grilles étirées ; sur grille uniforme ils valent -mu et 1 et sont
    fournis au moment du schéma.
    """
    J: int
    h: float
    nodes: np.ndarray
    physical_nodes: np.ndarray
    alpha: float = 1.0
    drift_coef: Optional[np.ndarray] = None
    noise_scale: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ('nodes', 'physical_nodes', 'drift_coef', 'noise_scale'):
            array = getattr(self, name)
            if array is not None:
                array = np.array(array, dtype=float)
                array.setflags(write=False)
                object.__setattr__(self, name, array)

    @property
    def is_uniform(self) -> bool:
        return self.alpha == 1.0

    @property
    def interior(self) -> slice:
        return slice(1, self.J)

    def jacobian(self) -> np.ndarray:
        """g'(y_j) = (1/alpha) y_j^(1/alpha - 1) en chaque noeud (1 sur grille uniforme)."""
        if self.is_uniform:
            return np.ones(self.J + 1)
        y = self.nodes
        return np.power(y, 1.0 / self.alpha - 1.0) / self.alpha

    def to_dict(self) -> Dict[str, Any]:
        return {
            'J': self.J,
            'h': self.h,
            'alpha': self.alpha,
            'x_lo': float(self.physical_nodes[0]),
            'x_hi': float(self.physical_nodes[-1]),
        }

    def __repr__(self):
        return f'<Grid J={self.J} h={self.h:.6g} alpha={self.alpha}>'
