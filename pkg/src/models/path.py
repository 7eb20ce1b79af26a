from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class BrownianPath:
    """
    Tirages normaux Z_n d'un mouvement brownien M échantillonné au pas k.

    `draws` est de forme (N,) ou (N, M) : une colonne par trajectoire.
    """
    k: float
    draws: np.ndarray

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)

    @property
    def n_steps(self) -> int:
        return self.draws.shape[0]

    @property
    def T(self) -> float:
        return self.n_steps * self.k

    @property
    def increments(self) -> np.ndarray:
        return np.sqrt(self.k) * self.draws

    def terminal_value(self) -> np.ndarray:
        """M_T = somme des accroissements sqrt(k) Z_n."""
        return np.sum(self.increments, axis=0)

    def column(self, m: int) -> 'BrownianPath':
        return BrownianPath(self.k, self.draws[:, m])

    def __repr__(self):
        return f'<BrownianPath k={self.k:.6g} N={self.n_steps} shape={self.draws.shape}>'
