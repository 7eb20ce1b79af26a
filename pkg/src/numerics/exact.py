"""
Solution exacte de l'EDPS sur la droite réelle et projection de la donnée
initiale de Dirac sur la base des fonctions chapeau.
"""

import numpy as np

from src.errors import DomainError
from src.models import Grid, ModelParams, SolutionField
from src.numerics.grid import to_computational


def exact_solution(params: ModelParams, t, m_t, x):
    """
    Densité gaussienne v(t, x) conditionnelle à la valeur M_t du brownien commun.

    v(t, x) = (2 pi (1-rho) t)^(-1/2) exp(-(x - x0 - mu t - sqrt(rho) M_t)^2 / (2 (1-rho) t))

    Args:
        params (ModelParams): Paramètres du modèle
        t (float): Instant, strictement positif
        m_t (float ou array): Valeur(s) du brownien commun en t
        x (float ou array): Coordonnée(s) physique(s)

    Returns:
        float ou array: Densité, avec diffusion des formes de m_t et x
    """
    if not t > 0.0:
        raise DomainError(f'la solution exacte exige t > 0, reçu t={t}')
    if not 0.0 <= params.rho < 1.0:
        raise DomainError(f'variance dégénérée pour rho={params.rho}')
    variance = (1.0 - params.rho) * t
    centre = params.x0 + params.mu * t + np.sqrt(params.rho) * np.asarray(m_t, dtype=float)
    shift = np.asarray(x, dtype=float) - centre
    return np.exp(-shift * shift / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)


def dirac_hat_projection(grid: Grid, x0: float) -> SolutionField:
    """
    Projette delta(x - x0) sur les fonctions chapeau de la grille.

    On évalue les chapeaux en coordonnée de calcul y0 = f(x0) (au plus deux
    poids non nuls) puis on normalise pour que la masse discrète
    h * sum(w_j g'(y_j)) vaille exactement 1. Sur grille uniforme on obtient
    v_j = max(0, 1 - |x_j - x0| / h) / h.

    Args:
        grid (Grid): Grille de calcul
        x0 (float): Position du Dirac (coordonnée physique)

    Returns:
        SolutionField: Champ initial au niveau de temps 0
    """
    x_lo, x_hi = grid.physical_nodes[0], grid.physical_nodes[-1]
    if not x_lo <= x0 <= x_hi:
        raise DomainError(f'x0={x0} hors de la grille [{x_lo}, {x_hi}]')
    y0 = to_computational(grid, x0)
    hats = np.maximum(0.0, 1.0 - np.abs(grid.nodes - y0) / grid.h)
    weight = np.sum(hats * grid.jacobian())
    if weight <= 0.0:
        raise DomainError(f'x0={x0} ne porte aucune masse sur la grille')
    return SolutionField(hats / (grid.h * weight), grid, n=0)
