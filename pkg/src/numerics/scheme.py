"""
Pas de temps theta-sigma de Milstein pour

    dv = -mu v_x dt + 1/2 v_xx dt - sqrt(rho) v_x dM.

Le pas résout M V_{n+1} = R(Z_n) V_n, où M est la matrice assemblée par
`assemble_lhs`. theta = sigma = 0 donne le schéma explicite, sigma = 0 le
theta-schéma, theta = 1 et sigma = 0 le schéma implicite en dérive.
"""

import logging
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from src.errors import DomainError, NumericalOverflowError, require
from src.models import BoundaryKind, BrownianPath, Grid, ItoVariant, ModelParams, SchemeParams, SolutionField
from src.numerics.grid import curvature, local_coefficients
from src.numerics.operators import (
    TridiagonalMatrix,
    apply_D1,
    apply_D1_squared,
    apply_D2,
    assemble_lhs,
    solve_tridiagonal,
)

logger = logging.getLogger(__name__)


class ThetaSigmaStepper:
    """
    Avance un champ (ou un lot de champs) d'un pas de temps k.

    Les coefficients nodaux et la matrice implicite (avec sa factorisation)
    sont calculés une fois à la construction.
    """

    def __init__(self, grid: Grid, scheme: SchemeParams, params: ModelParams, k: float,
                 lhs: Optional[TridiagonalMatrix] = None):
        require(k > 0.0, f'le pas de temps doit être positif, reçu {k}')
        self.grid = grid
        self.scheme = scheme
        self.params = params
        self.k = k
        self.lhs = lhs if lhs is not None else assemble_lhs(grid, scheme, k, params)
        self.lhs.factorize()
        b, s = local_coefficients(grid, params, scheme.bc)
        require(self.lhs.size == b.shape[0], 'matrice assemblée pour une autre grille ou condition aux limites')

        h, theta, sigma, rho = grid.h, scheme.theta, scheme.sigma, params.rho
        self._drift = (1.0 - theta) * b * k / (2.0 * h)
        self._diffusion = (1.0 - theta) * s * s * k / (2.0 * h * h)
        self._ito = rho * s * s * k / (2.0 * h * h)
        self._ito_explicit = (1.0 - sigma) * self._ito
        self._noise = np.sqrt(rho * k) * s / (2.0 * h)
        # rho k (z^2 - 1) f''(g) w_y / 2 : partie premier ordre de (s d/dy)^2 sur grille étirée
        cross = rho * k * curvature(grid, params, scheme.bc) / (4.0 * h)
        self._cross = cross if np.any(cross) else None

    def unknowns(self, values: np.ndarray) -> np.ndarray:
        if self.scheme.bc == BoundaryKind.PERIODIC:
            return values[:self.grid.J]
        return values[1:self.grid.J]

    def assemble_field(self, u: np.ndarray) -> np.ndarray:
        values = np.zeros((self.grid.J + 1,) + u.shape[1:])
        if self.scheme.bc == BoundaryKind.PERIODIC:
            values[:self.grid.J] = u
            values[self.grid.J] = u[0]
        else:
            values[1:self.grid.J] = u
        return values

    def rhs(self, u: np.ndarray, z) -> np.ndarray:
        bc = self.scheme.bc
        batch = u.ndim == 2
        column = (lambda a: a[:, None]) if batch else (lambda a: a)
        z = np.asarray(z, dtype=float)
        if batch and z.ndim == 0:
            z = np.full(u.shape[1], float(z))

        d1 = apply_D1(u, bc)
        d2 = apply_D2(u, bc)
        if self.scheme.ito_variant == ItoVariant.ITERATED:
            # (z^2 - 1) Q + D2 : la partie -rho D2 pondérée par sigma reste compacte
            wide = apply_D1_squared(u, bc) / 4.0
            ito = z * z * wide - wide + d2
        else:
            ito = z * z * d2

        r = (u
             + column(self._drift) * d1
             + column(self._diffusion - self._ito_explicit) * d2
             - column(self._noise) * z * d1
             + column(self._ito) * ito)
        if self._cross is not None:
            r = r + column(self._cross) * (z * z - 1.0) * d1
        return r

    def advance(self, values: np.ndarray, z) -> np.ndarray:
        with np.errstate(over='ignore', invalid='ignore'):
            u = solve_tridiagonal(self.lhs, self.rhs(self.unknowns(values), z))
        if not np.all(np.isfinite(u)):
            raise NumericalOverflowError('valeurs non finies après le pas de temps : schéma instable')
        return self.assemble_field(u)


def step(v: SolutionField, z, k: float, scheme: SchemeParams, params: ModelParams,
         lhs: TridiagonalMatrix) -> SolutionField:
    """
    Un pas du schéma theta-sigma de Milstein.

    Args:
        v (SolutionField): Champ au niveau n
        z (float ou array): Tirage(s) N(0, 1), un par trajectoire du lot
        k (float): Pas de temps
        scheme (SchemeParams): Poids theta, sigma, variante d'Itô, conditions aux limites
        params (ModelParams): Coefficients de l'EDPS
        lhs (TridiagonalMatrix): Matrice assemblée pour (grille, schéma, k)

    Returns:
        SolutionField: Champ au niveau n+1
    """
    if not np.all(np.isfinite(z)):
        raise DomainError('tirage gaussien non fini')
    stepper = ThetaSigmaStepper(v.grid, scheme, params, k, lhs=lhs)
    try:
        values = stepper.advance(v.values, z)
    except NumericalOverflowError as e:
        raise NumericalOverflowError(str(e), step_index=v.n) from e
    return SolutionField(values, v.grid, n=v.n + 1)


def observation_steps(times: Iterable[float], k: float) -> List[int]:
    """Indices des pas achevés les plus proches des instants demandés."""
    return [int(round(t / k)) for t in times]


def run(v0: SolutionField, path: BrownianPath, scheme: SchemeParams, params: ModelParams,
        observe: Optional[Sequence[int]] = None,
        stepper: Optional[ThetaSigmaStepper] = None,
        monitor: Optional[Callable[[int, np.ndarray], None]] = None) -> List[SolutionField]:
    """
    Applique N pas avec les tirages du chemin brownien.

    Args:
        v0 (SolutionField): Donnée initiale, (J+1,) ou déjà en lot (J+1, M)
        path (BrownianPath): Tirages (N,) ou (N, M)
        scheme (SchemeParams): Paramètres du schéma
        params (ModelParams): Paramètres du modèle
        observe (Sequence[int]): Indices de pas à conserver ; None conserve toute la trajectoire
        stepper (ThetaSigmaStepper): Pas précalculé à réutiliser (optionnel)
        monitor (Callable): Appelé après chaque pas avec (indice du pas, valeurs)

    Returns:
        List[SolutionField]: États aux indices observés, dans l'ordre croissant
    """
    stepper = stepper or ThetaSigmaStepper(v0.grid, scheme, params, path.k)
    require(abs(stepper.k - path.k) <= 1e-15 * max(1.0, path.k), 'pas de temps du chemin et du schéma différents')
    n_steps = path.n_steps
    wanted = set(range(n_steps + 1)) if observe is None else set(observe)
    require(all(0 <= n <= n_steps for n in wanted), f'instant observé hors de [0, {n_steps}]')

    values = v0.values
    if path.draws.ndim == 2 and values.ndim == 1:
        values = np.repeat(values[:, None], path.draws.shape[1], axis=1)
    if scheme.bc == BoundaryKind.DIRICHLET and (np.any(values[0] != 0.0) or np.any(values[-1] != 0.0)):
        raise DomainError('donnée initiale non nulle sur un bord de Dirichlet : '
                          'la masse des noeuds 0 et J serait perdue (x0 dans la première ou la dernière maille)')

    states = []
    if 0 in wanted:
        states.append(SolutionField(values, v0.grid, n=0))
    for n in range(n_steps):
        try:
            values = stepper.advance(values, path.draws[n])
        except NumericalOverflowError as e:
            logger.warning('Débordement numérique au pas %d', n)
            raise NumericalOverflowError(f'pas {n} : {e}', step_index=n) from e
        if monitor is not None:
            monitor(n + 1, values)
        if n + 1 in wanted:
            states.append(SolutionField(values, v0.grid, n=n + 1))
    return states
