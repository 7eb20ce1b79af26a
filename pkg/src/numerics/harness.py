"""
Chemins browniens couplés, mesures d'erreur en moyenne quadratique,
estimateurs multiniveaux et oracle particulaire.

Chaque échantillon ne dépend que de son propre flux (graine, niveau, indice,
usage) ; les lots sont de taille fixe et la réduction se fait dans l'ordre
des indices, donc les résultats ne dépendent pas du nombre de threads.
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from src import config
from src.errors import DomainError, require
from src.models import (
    BrownianPath,
    ErrorEstimate,
    Grid,
    LevelEstimate,
    ModelParams,
    ParticleResult,
    SchemeParams,
    SolutionField,
)
from src.numerics.exact import dirac_hat_projection, exact_solution
from src.numerics.grid import build_stretched, build_uniform
from src.numerics.scheme import ThetaSigmaStepper, observation_steps, run
from src.numerics.streams import Purpose, stream

logger = logging.getLogger(__name__)


def _step_count(T: float, k: float) -> int:
    n = int(round(T / k))
    if n < 1 or abs(n * k - T) > 1e-12 * max(1.0, T):
        raise DomainError(f'T/k = {T / k} doit être entier')
    return n


def _interval_count(length: float, h: float) -> int:
    J = int(round(length / h))
    if J < 2 or abs(J * h - length) > 1e-9 * max(1.0, length):
        raise DomainError(f'la longueur {length} n\'est pas un multiple entier du pas {h}')
    return J


def sample_path(T: float, k: float, seed: int, level: int = 0, index: int = 0) -> BrownianPath:
    """
    Tire N = T/k normales indépendantes depuis le flux (graine, niveau, indice).

    Args:
        T (float): Horizon
        k (float): Pas de temps
        seed (int): Graine
        level (int): Niveau (clé du flux)
        index (int): Indice de trajectoire (clé du flux)

    Returns:
        BrownianPath: Chemin de N tirages
    """
    n = _step_count(T, k)
    return BrownianPath(k, stream(seed, level, index).standard_normal(n))


def sample_paths(T: float, k: float, seed: int, indices: Sequence[int], level: int = 0) -> BrownianPath:
    """Lot de trajectoires (N, len(indices)), une colonne par indice."""
    n = _step_count(T, k)
    draws = np.empty((n, len(indices)))
    for column, index in enumerate(indices):
        draws[:, column] = stream(seed, level, index).standard_normal(n)
    return BrownianPath(k, draws)


def coarsen_path(fine: BrownianPath) -> BrownianPath:
    """
    Chemin au pas 4k : Z^c_m = (sum_{n=4m}^{4m+3} sqrt(k) Z_n) / sqrt(4k).
    """
    if fine.n_steps % 4 != 0:
        raise DomainError(f'le nombre de pas {fine.n_steps} n\'est pas divisible par 4')
    grouped = fine.draws.reshape((fine.n_steps // 4, 4) + fine.draws.shape[1:])
    return BrownianPath(4.0 * fine.k, grouped.sum(axis=1) / 2.0)


def level_sequence(l: int, h0: float, k0: float) -> Tuple[float, float]:
    """h_l = h0 2^-l, k_l = k0 4^-l (k_l / h_l^2 constant)."""
    require(l >= 0, f'niveau négatif : {l}')
    return h0 * 2.0 ** (-l), k0 * 4.0 ** (-l)


def level_grid(params: ModelParams, level: int, h0: float, alpha: float = 1.0) -> Grid:
    """
    Grille du niveau l : J_l = J_0 2^l intervalles avec J_0 = (x_hi - x_lo) / h0.

    Pour alpha < 1, la grille est uniforme en y = x**alpha sur [0, x_hi**alpha]
    avec le même nombre d'intervalles.
    """
    require(level >= 0, f'niveau négatif : {level}')
    J = _interval_count(params.x_hi - params.x_lo, h0) * 2 ** level
    if alpha == 1.0:
        return build_uniform(params.x_lo, params.x_hi, J)
    if params.x_lo != 0.0:
        raise DomainError('la grille étirée exige un domaine [0, x_hi]')
    return build_stretched(params.x_hi, J, alpha, params)


def _evaluate(sample: Callable[[List[int]], np.ndarray], n_samples: int, threads: int = 1,
              chunk_size: int = config.CHUNK_SIZE) -> np.ndarray:
    """Évalue `sample` sur des lots d'indices consécutifs et concatène dans l'ordre."""
    chunks = [list(range(start, min(start + chunk_size, n_samples)))
              for start in range(0, n_samples, chunk_size)]
    if threads <= 1 or len(chunks) == 1:
        results = [sample(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(sample, chunks))
    return np.concatenate(results)


def _mean_and_variance(values: np.ndarray) -> Tuple[float, float]:
    n = values.shape[0]
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    return mean, math.fsum((values - mean) ** 2) / (n - 1)


def _estimate(level: int, h: float, k: float, values: np.ndarray) -> ErrorEstimate:
    mean, variance = _mean_and_variance(values)
    return ErrorEstimate(level=level, h=h, k=k, value=mean,
                         stderr=math.sqrt(variance / values.shape[0]), n_samples=values.shape[0])


def error_exact(level: int, M: int, scheme: SchemeParams, params: ModelParams, seed: int,
                h0: float = config.REFERENCE['h0'], k0: float = config.REFERENCE['k0'],
                threads: int = 1) -> ErrorEstimate:
    """
    E(h, k)^2 ~ (1/M) sum_m sum_j (v_j^N - v(Nk, x_j))^2 h contre la solution exacte.

    Args:
        level (int): Niveau de raffinement l
        M (int): Nombre de trajectoires
        scheme (SchemeParams): Schéma
        params (ModelParams): Modèle (domaine tronqué, Dirichlet homogène)
        seed (int): Graine
        h0, k0 (float): Pas du niveau 0
        threads (int): Nombre de threads

    Returns:
        ErrorEstimate: E^2 et son erreur standard Monte Carlo
    """
    h, k = level_sequence(level, h0, k0)
    grid = build_uniform(params.x_lo, params.x_hi, _interval_count(params.x_hi - params.x_lo, h))
    n_steps = _step_count(params.T, k)
    v0 = dirac_hat_projection(grid, params.x0)
    stepper = ThetaSigmaStepper(grid, scheme, params, k)

    def sample(indices: List[int]) -> np.ndarray:
        path = sample_paths(params.T, k, seed, indices, level)
        final = run(v0, path, scheme, params, observe=[n_steps], stepper=stepper)[-1]
        exact = exact_solution(params, params.T, path.terminal_value()[None, :], grid.physical_nodes[:, None])
        return grid.h * np.sum((final.values - exact) ** 2, axis=0)

    estimate = _estimate(level, h, k, _evaluate(sample, M, threads))
    logger.info('E^2 niveau %d (%s) : %.6e +- %.2e', level, scheme.label, estimate.value, estimate.stderr)
    return estimate


def error_two_grid(level: int, M: int, scheme: SchemeParams, params: ModelParams, seed: int,
                   h0: float = config.REFERENCE['h0'], k0: float = config.REFERENCE['k0'],
                   threads: int = 1) -> ErrorEstimate:
    """
    e(h, k)^2 ~ (1/M) sum_m sum_{j <= J/2} (f_{2j}^N - c_j^{N/4})^2 h.

    La solution fine utilise (h, k), la grossière (2h, 4k) et le chemin
    brownien agrégé par `coarsen_path`. Le domaine est celui de `params`
    (droite tronquée ou demi-droite absorbante).
    """
    h, k = level_sequence(level, h0, k0)
    length = params.x_hi - params.x_lo
    J = _interval_count(length, h)
    if J % 2 != 0:
        raise DomainError(f'grilles non emboîtées : J={J} impair')
    fine_grid = build_uniform(params.x_lo, params.x_hi, J)
    coarse_grid = build_uniform(params.x_lo, params.x_hi, J // 2)
    n_steps = _step_count(params.T, k)
    if n_steps % 4 != 0:
        raise DomainError(f'le nombre de pas fin {n_steps} n\'est pas divisible par 4')
    fine_stepper = ThetaSigmaStepper(fine_grid, scheme, params, k)
    coarse_stepper = ThetaSigmaStepper(coarse_grid, scheme, params, 4.0 * k)
    fine_v0 = dirac_hat_projection(fine_grid, params.x0)
    coarse_v0 = dirac_hat_projection(coarse_grid, params.x0)

    def sample(indices: List[int]) -> np.ndarray:
        path = sample_paths(params.T, k, seed, indices, level)
        fine = run(fine_v0, path, scheme, params, observe=[n_steps], stepper=fine_stepper)[-1]
        coarse = run(coarse_v0, coarsen_path(path), scheme, params,
                     observe=[n_steps // 4], stepper=coarse_stepper)[-1]
        return h * np.sum((fine.values[::2] - coarse.values) ** 2, axis=0)

    estimate = _estimate(level, h, k, _evaluate(sample, M, threads))
    logger.info('e^2 niveau %d (%s) : %.6e +- %.2e', level, scheme.label, estimate.value, estimate.stderr)
    return estimate


class LevelPayoff(Protocol):
    """Fonctionnelle P_l d'une trajectoire résolue au niveau l."""

    horizon: float

    def time_step(self, level: int) -> float: ...

    def cost(self, level: int) -> float: ...

    def __call__(self, level: int, path: BrownianPath) -> np.ndarray: ...


class SpdeLevelPayoff:
    """
    P_l = fonctionnelle des états résolus aux instants d'observation, sur la
    grille du niveau l (J_l = J_0 2^l intervalles, k_l = k0 4^-l).

    Args:
        params (ModelParams): Modèle
        scheme (SchemeParams): Schéma
        functional (Callable): (états observés, grille) -> valeurs par trajectoire
        h0, k0 (float): Pas physiques du niveau 0
        alpha (float): Exposant d'étirement (1 : grille uniforme)
        observe_times (Sequence[float]): Instants observés (défaut : T seul)
        monitor (Callable): Fabrique, par grille, d'un observateur appelé à chaque pas
        diagnostics: Compteurs renseignés par la fonctionnelle (optionnel)
    """

    def __init__(self, params: ModelParams, scheme: SchemeParams,
                 functional: Callable[[List[SolutionField], Grid], np.ndarray],
                 h0: float, k0: float, alpha: float = 1.0,
                 observe_times: Optional[Sequence[float]] = None,
                 monitor: Optional[Callable[[Grid], Callable[[int, np.ndarray], None]]] = None,
                 diagnostics: Optional[Any] = None):
        self.params = params
        self.scheme = scheme
        self.functional = functional
        self.h0 = h0
        self.k0 = k0
        self.alpha = alpha
        self.horizon = params.T
        self.observe_times = list(observe_times) if observe_times is not None else [params.T]
        self.monitor = monitor
        self.diagnostics = diagnostics
        self.base_intervals = _interval_count(params.x_hi - params.x_lo, h0)
        self._steppers: Dict[int, ThetaSigmaStepper] = {}
        self._lock = threading.Lock()

    def time_step(self, level: int) -> float:
        return level_sequence(level, self.h0, self.k0)[1]

    def grid(self, level: int) -> Grid:
        return level_grid(self.params, level, self.h0, self.alpha)

    def stepper(self, level: int) -> ThetaSigmaStepper:
        with self._lock:
            if level not in self._steppers:
                self._steppers[level] = ThetaSigmaStepper(self.grid(level), self.scheme, self.params,
                                                          self.time_step(level))
            return self._steppers[level]

    def cost(self, level: int) -> float:
        return self.grid(level).J * _step_count(self.horizon, self.time_step(level))

    def observation_steps(self, level: int) -> List[int]:
        k = self.time_step(level)
        steps = observation_steps(self.observe_times, k)
        for n, t in zip(steps, self.observe_times):
            if abs(n * k - t) > 1e-12 * max(1.0, t):
                raise DomainError(f"le pas k={k} ne divise pas l'instant d'observation {t}")
        return steps

    def __call__(self, level: int, path: BrownianPath) -> np.ndarray:
        stepper = self.stepper(level)
        v0 = dirac_hat_projection(stepper.grid, self.params.x0)
        monitor = self.monitor(stepper.grid) if self.monitor is not None else None
        states = run(v0, path, self.scheme, self.params, observe=self.observation_steps(level),
                     stepper=stepper, monitor=monitor)
        return np.asarray(self.functional(states, stepper.grid), dtype=float)


def mlmc_level_estimate(l: int, n_samples: int, payoff: LevelPayoff, seed: int,
                        threads: int = 1) -> LevelEstimate:
    """
    Moyenne de P_l - P_{l-1} sur N_l chemins couplés (P_0 seul au niveau 0).

    Le chemin grossier est l'agrégation du chemin fin, les chemins sont
    indépendants d'un échantillon et d'un niveau à l'autre.

    Args:
        l (int): Niveau
        n_samples (int): N_l, au moins 2
        payoff (LevelPayoff): Fonctionnelle P_l
        seed (int): Graine
        threads (int): Nombre de threads

    Returns:
        LevelEstimate: Moyenne de Y_l, variance d'un échantillon V_l, coût par échantillon
    """
    require(l >= 0, f'niveau négatif : {l}')
    require(n_samples >= 2, f'au moins 2 échantillons requis, reçu {n_samples}')
    k = payoff.time_step(l)

    def sample(indices: List[int]) -> np.ndarray:
        path = sample_paths(payoff.horizon, k, seed, indices, level=l)
        fine = payoff(l, path)
        if l == 0:
            return fine
        return fine - payoff(l - 1, coarsen_path(path))

    values = _evaluate(sample, n_samples, threads)
    mean, variance = _mean_and_variance(values)
    cost = payoff.cost(l) + (payoff.cost(l - 1) if l > 0 else 0.0)
    estimate = LevelEstimate(level=l, n_samples=n_samples, mean=mean, variance=variance, cost=cost,
                             alpha=getattr(payoff, 'alpha', None))
    logger.info('Niveau %d : N=%d moyenne=%.6e V=%.6e', l, n_samples, mean, variance)
    return estimate


def combine_levels(estimates: Sequence[LevelEstimate]) -> Tuple[float, float]:
    """Estimation multiniveau sum Y_l et sa variance sum V_l / N_l."""
    total = math.fsum(e.mean for e in estimates)
    variance = math.fsum(e.variance / e.n_samples for e in estimates)
    return total, variance


def optimal_samples(variances: Sequence[float], costs: Sequence[float], eps: float) -> List[int]:
    """
    Allocation N_l = ceil(eps^-2 sqrt(V_l / C_l) sum_m sqrt(V_m C_m)), à titre indicatif.
    """
    require(eps > 0.0, 'la précision cible doit être positive')
    require(len(variances) == len(costs), 'autant de variances que de coûts')
    weight = math.fsum(math.sqrt(v * c) for v, c in zip(variances, costs))
    return [max(2, math.ceil(math.sqrt(v / c) * weight / eps ** 2)) for v, c in zip(variances, costs)]


def particle_oracle(n_particles: int, path: BrownianPath, params: ModelParams, absorbing: bool,
                    seed: int, grid: Optional[Grid] = None) -> ParticleResult:
    """
    Système de particules dX^i = mu dt + sqrt(1-rho) dW^i + sqrt(rho) dM, schéma d'Euler-Maruyama.

    Les particules partagent le chemin commun M ; en régime absorbant, celles
    qui passent sous 0 (contrôle à chaque pas) sont retirées.

    Args:
        n_particles (int): Nombre de particules
        path (BrownianPath): Chemin commun (une seule trajectoire)
        params (ModelParams): Modèle
        absorbing (bool): Frontière absorbante en 0
        seed (int): Graine des bruits idiosyncratiques
        grid (Grid): Grille de l'histogramme (par défaut 128 intervalles sur le domaine)

    Returns:
        ParticleResult: Densité par noeud et fraction absorbée avec son erreur standard
    """
    require(path.draws.ndim == 1, 'l\'oracle particulaire prend une seule trajectoire commune')
    require(n_particles >= 1, 'au moins une particule')
    grid = grid or build_uniform(params.x_lo, params.x_hi, 128)
    rng = stream(seed, 0, 0, Purpose.IDIOSYNCRATIC)
    k = path.k
    idiosyncratic = math.sqrt((1.0 - params.rho) * k)
    common = math.sqrt(params.rho * k) * path.draws

    x = np.full(n_particles, params.x0)
    alive = np.ones(n_particles, dtype=bool)
    for n in range(path.n_steps):
        x += params.mu * k + idiosyncratic * rng.standard_normal(n_particles) + common[n]
        if absorbing:
            alive &= x > 0.0

    nodes = grid.physical_nodes
    middles = 0.5 * (nodes[1:] + nodes[:-1])
    edges = np.concatenate([[nodes[0]], middles, [nodes[-1]]])
    counts, _ = np.histogram(x[alive], bins=edges)
    density = counts / (n_particles * np.diff(edges))
    fraction = 1.0 - np.count_nonzero(alive) / n_particles
    stderr = math.sqrt(fraction * (1.0 - fraction) / n_particles)
    return ParticleResult(edges=edges, density=density, absorbed_fraction=fraction,
                          stderr=stderr, n_particles=n_particles)
