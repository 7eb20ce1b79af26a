"""
Différences centrales non divisées D1, D2 (et D1 itérée) et algèbre
tridiagonale des pas implicites.

Les opérateurs agissent sur le vecteur des inconnues le long de l'axe 0 ;
une seconde dimension éventuelle indexe des trajectoires indépendantes.
Dirichlet : valeurs fantômes nulles au-delà des bords. Périodique : indices
pris modulo n.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.errors import SingularSystemError, require
from src.models import BoundaryKind, Grid, ModelParams, SchemeParams
from src.numerics.grid import local_coefficients

PIVOT_TOLERANCE = 1e-14


def _padded(v: np.ndarray, bc: BoundaryKind, width: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    require(v.shape[0] >= 3, 'il faut au moins 3 valeurs pour un stencil centré')
    pad = [(width, width)] + [(0, 0)] * (v.ndim - 1)
    mode = 'wrap' if BoundaryKind(bc) == BoundaryKind.PERIODIC else 'constant'
    return np.pad(v, pad, mode=mode)


def apply_D1(v: np.ndarray, bc: BoundaryKind = BoundaryKind.DIRICHLET) -> np.ndarray:
    """(D1 v)_j = v_{j+1} - v_{j-1}."""
    p = _padded(v, bc, 1)
    return p[2:] - p[:-2]


def apply_D2(v: np.ndarray, bc: BoundaryKind = BoundaryKind.DIRICHLET) -> np.ndarray:
    """(D2 v)_j = v_{j+1} - 2 v_j + v_{j-1}."""
    p = _padded(v, bc, 1)
    return p[2:] - 2.0 * p[1:-1] + p[:-2]


def apply_D1_squared(v: np.ndarray, bc: BoundaryKind = BoundaryKind.DIRICHLET) -> np.ndarray:
    """Stencil élargi (D1 D1 v)_j = v_{j+2} - 2 v_j + v_{j-2}."""
    p = _padded(v, bc, 2)
    return p[4:] - 2.0 * p[2:-2] + p[:-4]


@dataclass(eq=False)
class TridiagonalMatrix:
    """
    Matrice tridiagonale, cyclique si `periodic`.

    lower[i] multiplie x[i-1] dans la ligne i, upper[i] multiplie x[i+1].
    En périodique, lower[0] et upper[n-1] sont les coins (couplage x[n-1]
    dans la ligne 0 et x[0] dans la ligne n-1) ; sinon ils sont ignorés.
    """
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    periodic: bool = False
    _factors: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)
    _cyclic: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        n = self.diag.shape[0]
        require(self.lower.shape == (n,) and self.upper.shape == (n,),
                'diagonales de longueurs incohérentes')
        if not self.periodic:
            self.lower = self.lower.copy()
            self.upper = self.upper.copy()
            self.lower[0] = 0.0
            self.upper[-1] = 0.0

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = (-1,) + (1,) * (x.ndim - 1)
        lower, diag, upper = (a.reshape(shape) for a in (self.lower, self.diag, self.upper))
        if self.periodic:
            return diag * x + lower * np.roll(x, 1, axis=0) + upper * np.roll(x, -1, axis=0)
        y = diag * x
        y[1:] += lower[1:] * x[:-1]
        y[:-1] += upper[:-1] * x[1:]
        return y

    def factorize(self) -> "TridiagonalMatrix":
        """Calcule (une fois) les pivots de Thomas ; lève SingularSystemError si un pivot est quasi nul."""
        if self.periodic:
            if self._cyclic is None:
                self._cyclic = _cyclic_factors(self)
        elif self._factors is None:
            self._factors = _thomas_factors(self.lower, self.diag, self.upper)
        return self

    def to_dense(self) -> np.ndarray:
        n = self.size
        dense = np.diag(self.diag)
        dense[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        dense[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        if self.periodic:
            dense[0, n - 1] += self.lower[0]
            dense[n - 1, 0] += self.upper[-1]
        return dense


def _thomas_factors(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray):
    n = diag.shape[0]
    pivots = np.empty(n)
    ratios = np.empty(n)
    pivots[0] = diag[0]
    for i in range(n):
        if i > 0:
            pivots[i] = diag[i] - lower[i] * ratios[i - 1]
        if abs(pivots[i]) < PIVOT_TOLERANCE:
            raise SingularSystemError(
                f'pivot {pivots[i]:.3e} en ligne {i} : système singulier ou paramètres instables')
        ratios[i] = upper[i] / pivots[i] if i < n - 1 else 0.0
    return pivots, ratios


def _thomas_sweep(lower: np.ndarray, factors, rhs: np.ndarray) -> np.ndarray:
    pivots, ratios = factors
    n = pivots.shape[0]
    g = np.empty_like(rhs)
    g[0] = rhs[0] / pivots[0]
    for i in range(1, n):
        g[i] = (rhs[i] - lower[i] * g[i - 1]) / pivots[i]
    x = g
    for i in range(n - 2, -1, -1):
        x[i] = g[i] - ratios[i] * x[i + 1]
    return x


def _cyclic_factors(m: TridiagonalMatrix) -> tuple:
    n = m.size
    corner_top, corner_bottom = m.lower[0], m.upper[-1]
    gamma = -m.diag[0]
    if abs(gamma) < PIVOT_TOLERANCE:
        raise SingularSystemError('diagonale nulle en ligne 0 du système cyclique')
    diag = m.diag.copy()
    diag[0] -= gamma
    diag[-1] -= corner_bottom * corner_top / gamma
    lower = m.lower.copy()
    lower[0] = 0.0
    factors = _thomas_factors(lower, diag, m.upper)
    u = np.zeros(n)
    u[0], u[-1] = gamma, corner_bottom
    z = _thomas_sweep(lower, factors, u)
    denominator = 1.0 + z[0] + corner_top * z[-1] / gamma
    if abs(denominator) < PIVOT_TOLERANCE:
        raise SingularSystemError('correction de Sherman-Morrison singulière')
    return lower, factors, z, gamma, corner_top, denominator


def solve_tridiagonal(m: TridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """
    Résout m x = rhs par élimination de Thomas sans pivotage.

    La factorisation est calculée une seule fois par matrice et réutilisée
    à chaque pas de temps. Le cas cyclique passe par Sherman-Morrison.

    Args:
        m (TridiagonalMatrix): Matrice assemblée
        rhs (np.ndarray): Second membre de forme (n,) ou (n, M)

    Returns:
        np.ndarray: Solution de même forme que rhs
    """
    rhs = np.array(rhs, dtype=float)
    require(rhs.shape[0] == m.size, f'second membre de taille {rhs.shape[0]} pour un système de taille {m.size}')
    m.factorize()
    if not m.periodic:
        return _thomas_sweep(m.lower, m._factors, rhs)

    lower, factors, z, gamma, corner_top, denominator = m._cyclic
    x = _thomas_sweep(lower, factors, rhs)
    correction = (x[0] + corner_top * x[-1] / gamma) / denominator
    if x.ndim == 1:
        return x - correction * z
    return x - z[:, None] * correction[None, :]



def assemble_lhs(grid: Grid, scheme: SchemeParams, k: float, params: ModelParams) -> TridiagonalMatrix:
    """
    Assemble I - theta (b k / 2h) D1 - theta (s^2 k / 2h^2) D2 + sigma (rho s^2 k / 2h^2) D2.

    Sur grille uniforme b = -mu et s = 1. En Dirichlet le système porte sur
    les J-1 noeuds intérieurs, en périodique sur les J noeuds 0..J-1.
    """
    require(k > 0.0, f'le pas de temps doit être positif, reçu {k}')
    b, s = local_coefficients(grid, params, scheme.bc)
    h = grid.h
    c1 = -scheme.theta * b * k / (2.0 * h)
    c2 = (scheme.sigma * params.rho - scheme.theta) * s * s * k / (2.0 * h * h)
    return TridiagonalMatrix(
        lower=c2 - c1,
        diag=1.0 - 2.0 * c2,
        upper=c2 + c1,
        periodic=scheme.bc == BoundaryKind.PERIODIC,
    )
