from dataclasses import dataclass

import numpy as np

from src.models.grid import Grid


@dataclass(eq=False)
class SolutionField:
    """
    Valeurs nodales v_j au niveau de temps n.

    `values` est de forme (J+1,) pour une trajectoire, ou (J+1, M) pour un
    lot de M trajectoires browniennes indépendantes résolues ensemble.
    """
    values: np.ndarray
    grid: Grid
    n: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def mass(self, periodic: bool = False) -> np.ndarray:
        """
        Masse discrète h * sum(w_j g'(y_j)) sur les noeuds intérieurs,
        ou sur les noeuds 0..J-1 d'un champ périodique.
        """
        nodes = slice(0, self.grid.J) if periodic else self.grid.interior
        weights = self.grid.jacobian()[nodes]
        values = self.values[nodes]
        if values.ndim == 2:
            weights = weights[:, None]
        return self.grid.h * np.sum(values * weights, axis=0)

    def __repr__(self):
        return f'<SolutionField n={self.n} shape={self.values.shape}>'
