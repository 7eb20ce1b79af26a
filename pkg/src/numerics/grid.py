"""
Grilles uniformes et grilles étirées en puissance y = x**alpha, avec les
coefficients de l'EDPS transformée

    dw = (-mu f'(g(y)) + 1/2 f''(g(y))) w_y dt + 1/2 f'(g(y))^2 w_yy dt
         - sqrt(rho) f'(g(y)) w_y dM,

où f(x) = x**alpha et g = f^{-1}.
"""

from typing import Tuple

import numpy as np

from src.errors import DomainError, require
from src.models import BoundaryKind, Grid, ModelParams


def build_uniform(x_lo: float, x_hi: float, J: int) -> Grid:
    """
    Construit une grille uniforme de J intervalles sur [x_lo, x_hi].

    Args:
        x_lo (float): Borne gauche
        x_hi (float): Borne droite
        J (int): Nombre d'intervalles (au moins 2)

    Returns:
        Grid: Grille de pas h = (x_hi - x_lo) / J
    """
    require(int(J) == J and J >= 2, f'il faut au moins 2 intervalles, reçu J={J}')
    require(x_lo < x_hi, f'domaine vide [{x_lo}, {x_hi}]')
    J = int(J)
    h = (x_hi - x_lo) / J
    nodes = x_lo + h * np.arange(J + 1)
    nodes[-1] = x_hi
    return Grid(J=J, h=h, nodes=nodes, physical_nodes=nodes, alpha=1.0)


def build_stretched(x_hi: float, J: int, alpha: float, params: ModelParams) -> Grid:
    """
    Construit une grille uniforme en y = x**alpha sur [0, x_hi**alpha].

    Les noeuds physiques sont x_j = y_j**(1/alpha), raffinés près de
    la frontière absorbante x = 0 quand alpha < 1. Les coefficients
    s_j = f'(g(y_j)) et b_j = -mu s_j + f''(g(y_j))/2 sont évalués aux
    seuls noeuds intérieurs (ils sont singuliers en y = 0).

    Args:
        x_hi (float): Borne droite physique
        J (int): Nombre d'intervalles en y
        alpha (float): Exposant d'étirement dans ]0, 1]
        params (ModelParams): Paramètres du modèle (pour mu)

    Returns:
        Grid: Grille étirée avec ses tableaux de coefficients
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"l'exposant d'étirement doit être dans ]0, 1], reçu {alpha}")
    require(int(J) == J and J >= 2, f'il faut au moins 2 intervalles, reçu J={J}')
    require(x_hi > 0.0, f'la borne droite doit être positive, reçu {x_hi}')
    J = int(J)
    y_hi = x_hi ** alpha
    h = y_hi / J
    y = h * np.arange(J + 1)
    y[-1] = y_hi
    x = np.power(y, 1.0 / alpha)
    x[-1] = x_hi

    y_int = y[1:J]
    x_int = x[1:J]
    noise_scale = alpha * np.power(y_int, 1.0 - 1.0 / alpha)
    second = alpha * (alpha - 1.0) * np.power(x_int, alpha - 2.0)
    drift_coef = -params.mu * noise_scale + 0.5 * second
    return Grid(J=J, h=h, nodes=y, physical_nodes=x, alpha=alpha,
                drift_coef=drift_coef, noise_scale=noise_scale)


def to_computational(grid: Grid, x: float) -> float:
    """f(x) = x**alpha (identité sur grille uniforme)."""
    return x if grid.is_uniform else x ** grid.alpha


def local_coefficients(grid: Grid, params: ModelParams,
                       bc: BoundaryKind = BoundaryKind.DIRICHLET) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients (b_j, s_j) sur les inconnues du système.

    Dirichlet : noeuds intérieurs 1..J-1. Périodique : noeuds 0..J-1,
    seulement sur grille uniforme.
    """
    n = grid.J - 1 if bc == BoundaryKind.DIRICHLET else grid.J
    if grid.drift_coef is None:
        return np.full(n, -params.mu), np.ones(n)
    if bc == BoundaryKind.PERIODIC:
        raise DomainError('les conditions périodiques ne sont définies que sur grille uniforme')
    return np.asarray(grid.drift_coef), np.asarray(grid.noise_scale)


def curvature(grid: Grid, params: ModelParams, bc: BoundaryKind = BoundaryKind.DIRICHLET) -> np.ndarray:
    """
    f''(g(y_j)) = s_j s'(y_j) sur les inconnues : coefficient de w_y dans
    le terme de Milstein rho/2 (s d/dy)(s w_y). Nul sur grille uniforme.
    """
    b, s = local_coefficients(grid, params, bc)
    if grid.drift_coef is None:
        return np.zeros_like(b)
    return 2.0 * (b + params.mu * s)
