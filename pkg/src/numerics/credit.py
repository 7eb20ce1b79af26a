"""
Perte du panier, nominal de tranche et jambe de spread actualisée.

La perte L_t = 1 - masse survivante est calculée par la somme de Riemann
intérieure h * sum_{j=1}^{J-1} w_j g'(y_j).
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src import config
from src.errors import DomainError, require
from src.models import Grid, LevelEstimate, ModelParams, SchemeParams, SolutionField, TrancheSpec
from src.numerics.harness import SpdeLevelPayoff, level_sequence, mlmc_level_estimate

logger = logging.getLogger(__name__)

MONOTONICITY_TOLERANCE = 1e-8


@dataclass
class LossDiagnostics:
    """Compteurs partagés entre threads : écrêtages et pertes décroissantes."""
    clamped: int = 0
    monotonicity_violations: int = 0
    worst_violation: float = 0.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record_clamped(self, count: int) -> None:
        if count:
            with self._lock:
                self.clamped += count

    def record_decrease(self, decrease: np.ndarray) -> None:
        bad = decrease > MONOTONICITY_TOLERANCE
        if np.any(bad):
            with self._lock:
                self.monotonicity_violations += int(np.count_nonzero(bad))
                self.worst_violation = max(self.worst_violation, float(np.max(decrease)))

    def reset(self) -> None:
        with self._lock:
            self.clamped = 0
            self.monotonicity_violations = 0
            self.worst_violation = 0.0

    def to_dict(self) -> Dict[str, Any]:
        with self._lock:
            return {
                'loss_clamped': self.clamped,
                'monotonicity_violations': self.monotonicity_violations,
                'worst_loss_drop': self.worst_violation,
            }


def _raw_loss(values: np.ndarray, grid: Grid) -> np.ndarray:
    weights = grid.jacobian()[1:grid.J]
    interior = values[1:grid.J]
    if interior.ndim == 2:
        weights = weights[:, None]
    return 1.0 - grid.h * np.sum(interior * weights, axis=0)


def loss(field: SolutionField, grid: Grid, diagnostics: Optional[LossDiagnostics] = None):
    """
    Fraction de firmes ayant fait défaut, écrêtée dans [0, 1].

    Args:
        field (SolutionField): Champ (une trajectoire ou un lot)
        grid (Grid): Grille du champ (uniforme ou étirée)
        diagnostics (LossDiagnostics): Compteur d'écrêtages (optionnel)

    Returns:
        float ou np.ndarray: L pour chaque trajectoire
    """
    raw = _raw_loss(field.values, grid)
    clamped = np.clip(raw, 0.0, 1.0)
    count = int(np.count_nonzero(clamped != raw))
    if count:
        logger.debug('%d valeur(s) de perte écrêtée(s) dans [0, 1]', count)
    if diagnostics is not None:
        diagnostics.record_clamped(count)
    return float(clamped) if clamped.ndim == 0 else clamped


def tranche_notional(L, tranche: TrancheSpec):
    """Z = max(d - L, 0) - max(a - L, 0)."""
    L = np.asarray(L, dtype=float)
    z = np.maximum(tranche.d - L, 0.0) - np.maximum(tranche.a - L, 0.0)
    return float(z) if z.ndim == 0 else z


def spread_leg(z_values, tranche: TrancheSpec):
    """
    Échantillon sum_{i=1}^{n} exp(-r i q) (Z_{T_{i-1}} - Z_{T_i}) d'une trajectoire.

    Args:
        z_values (array): Z aux dates T_0..T_n, forme (n+1,) ou (n+1, M)
        tranche (TrancheSpec): Tranche et échéancier

    Returns:
        float ou np.ndarray: Paiements actualisés
    """
    z = np.asarray(z_values, dtype=float)
    if z.shape[0] != tranche.n + 1:
        raise DomainError(f'{tranche.n + 1} valeurs de Z attendues, reçu {z.shape[0]}')
    discount = np.exp(-tranche.r * tranche.q * np.arange(1, tranche.n + 1))
    if z.ndim == 2:
        discount = discount[:, None]
    leg = np.sum(discount * (z[:-1] - z[1:]), axis=0)
    return float(leg) if leg.ndim == 0 else leg


def tranche_payoff(params: ModelParams, scheme: SchemeParams, tranche: TrancheSpec, alpha: float = 1.0,
                   h0: float = config.CREDIT['h0'], k0: float = config.CREDIT['k0'],
                   diagnostics: Optional[LossDiagnostics] = None) -> SpdeLevelPayoff:
    """
    Fonctionnelle P_l : résolution du problème absorbant, Z aux dates de paiement, jambe de spread.
    """
    require(abs(params.T - tranche.T) <= 1e-12 * max(1.0, tranche.T),
            f'horizon du modèle {params.T} différent de la maturité {tranche.T}')
    require(params.x_lo == 0.0, 'le problème absorbant est posé sur [0, x_hi]')
    diagnostics = diagnostics if diagnostics is not None else LossDiagnostics()

    def functional(states: List[SolutionField], grid: Grid) -> np.ndarray:
        z = np.stack([tranche_notional(loss(state, grid, diagnostics), tranche) for state in states])
        return spread_leg(z, tranche)

    def monitor(grid: Grid) -> Callable[[int, np.ndarray], None]:
        previous = {'loss': None}

        def check(n: int, values: np.ndarray) -> None:
            current = _raw_loss(values, grid)
            if previous['loss'] is not None:
                diagnostics.record_decrease(previous['loss'] - current)
            previous['loss'] = current

        return check

    return SpdeLevelPayoff(params, scheme, functional, h0=h0, k0=k0, alpha=alpha,
                           observe_times=tranche.payment_times(), monitor=monitor,
                           diagnostics=diagnostics)


def price_level(l: int, n_samples: int, scheme: SchemeParams, params: ModelParams, tranche: TrancheSpec,
                alpha: float = 1.0, seed: int = 0, h0: float = config.CREDIT['h0'],
                k0: float = config.CREDIT['k0'], threads: int = 1,
                payoff: Optional[SpdeLevelPayoff] = None) -> LevelEstimate:
    """
    Estimateur Y_l de E[P_l - P_{l-1}] (E[P_0] au niveau 0) pour la jambe de spread.

    Args:
        l (int): Niveau
        n_samples (int): N_l
        scheme (SchemeParams): Schéma
        params (ModelParams): Modèle sur [0, x_hi]
        tranche (TrancheSpec): Tranche
        alpha (float): Exposant d'étirement (1 : grille uniforme, 1/2 : y = sqrt(x))
        seed (int): Graine
        h0, k0 (float): Pas du niveau 0
        threads (int): Nombre de threads
        payoff (SpdeLevelPayoff): Fonctionnelle déjà construite à réutiliser (optionnel)

    Returns:
        LevelEstimate: Statistiques du niveau
    """
    _, k = level_sequence(l, h0, k0)
    ratio = tranche.q / k
    if abs(ratio - round(ratio)) > 1e-9:
        raise DomainError(f'le pas k_{l}={k} ne divise pas l\'intervalle de paiement q={tranche.q}')
    payoff = payoff or tranche_payoff(params, scheme, tranche, alpha=alpha, h0=h0, k0=k0)
    diagnostics = payoff.diagnostics
    if diagnostics is not None:
        diagnostics.reset()
    estimate = mlmc_level_estimate(l, n_samples, payoff, seed, threads=threads)
    if diagnostics is not None:
        estimate.diagnostics = diagnostics.to_dict()
        if diagnostics.monotonicity_violations:
            logger.warning('Niveau %d : perte non monotone, %d violation(s), pire baisse %.3e',
                           l, diagnostics.monotonicity_violations, diagnostics.worst_violation)
    return estimate
