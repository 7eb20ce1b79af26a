"""
Stabilité en moyenne quadratique des modes de Fourier V_j^n = X_n exp(i j phi).

Avec a = -(2/h^2) sin^2(phi/2) et c = (sqrt(rho)/h) sin(phi), le facteur
d'amplification vaut

    G(phi) = [(1 + k a (1-theta+rho sigma))^2 + k c^2 + 2 k^2 rho^2 a^2] / (1 - k a (theta - rho sigma))^2

et le schéma est stable ssi (k/h^2) f(rho; theta, sigma) < 1 avec
f = 1 - 2 (theta - rho sigma - rho^2).
"""

import math

import numpy as np

from src.errors import DomainError, SingularSystemError, StabilityViolationError, require
from src.models import Grid, ModeDecayEstimate, ModelParams, SchemeParams, StabilityReport
from src.numerics.streams import Purpose, stream

N_PHI = 1024


def _check_rho(rho: float) -> None:
    if not 0.0 <= rho < 1.0:
        raise DomainError(f'rho doit être dans [0, 1), reçu {rho}')


def stability_function(rho: float, theta: float, sigma: float) -> float:
    """f(rho; theta, sigma) = 1 - 2 (theta - rho sigma - rho^2)."""
    _check_rho(rho)
    return 1.0 - 2.0 * (theta - rho * sigma - rho * rho)


def stability_limit(rho: float, theta: float, sigma: float) -> float:
    """Borne supérieure de k/h^2 (infinie si la stabilité est inconditionnelle)."""
    f = stability_function(rho, theta, sigma)
    return math.inf if f <= 0.0 else 1.0 / f


def phi_sweep(n_phi: int = N_PHI) -> np.ndarray:
    """n_phi points uniformes sur ]0, pi]."""
    return np.pi * np.arange(1, n_phi + 1) / n_phi


def amplification(phi, k: float, h: float, rho: float, theta: float, sigma: float, mu: float = 0.0):
    """
    Facteur d'amplification en moyenne quadratique G(phi) d'un pas.

    Pour mu non nul, la dérive entre dans le symbole par i k d avec
    d = -(mu/h) sin(phi) ; pour mu = 0 on retrouve la forme fermée.

    Args:
        phi (float ou array): Angle(s) du mode, |phi| <= pi
        k (float): Pas de temps
        h (float): Pas d'espace
        rho (float): Corrélation dans [0, 1)
        theta (float): Poids implicite de la dérive
        sigma (float): Poids implicite du terme d'Itô déterministe
        mu (float): Dérive (0 par défaut)

    Returns:
        float ou array: G(phi)
    """
    _check_rho(rho)
    require(k > 0.0 and h > 0.0, 'k et h doivent être positifs')
    phi = np.asarray(phi, dtype=float)
    require(bool(np.all(np.abs(phi) <= np.pi + 1e-12)), 'phi doit vérifier |phi| <= pi')
    a = -2.0 / (h * h) * np.sin(phi / 2.0) ** 2
    c = math.sqrt(rho) / h * np.sin(phi)
    d = -mu / h * np.sin(phi)
    numerator = ((1.0 + k * a * (1.0 - theta + rho * sigma)) ** 2
                 + (k * (1.0 - theta) * d) ** 2
                 + k * c * c
                 + 2.0 * k * k * rho * rho * a * a)
    denominator = (1.0 - k * a * (theta - rho * sigma)) ** 2 + (k * theta * d) ** 2
    if np.any(np.abs(denominator) < 1e-14):
        raise SingularSystemError('dénominateur nul dans le facteur d\'amplification')
    gain = numerator / denominator
    return float(gain) if gain.ndim == 0 else gain


def classify(rho: float, theta: float, sigma: float, k: float, h: float, n_phi: int = N_PHI) -> StabilityReport:
    """
    Verdict de stabilité en forme fermée, recoupé par un balayage en phi.

    Args:
        rho, theta, sigma (float): Paramètres du schéma
        k (float): Pas de temps
        h (float): Pas d'espace
        n_phi (int): Nombre de points du balayage

    Returns:
        StabilityReport: f, borne sur k/h^2, verdict et sup de G sur le balayage
    """
    f = stability_function(rho, theta, sigma)
    unconditional = f <= 0.0
    max_ratio = math.inf if unconditional else 1.0 / f
    ratio = k / (h * h)
    gains = amplification(phi_sweep(n_phi), k, h, rho, theta, sigma)
    return StabilityReport(
        f_value=f,
        max_ratio=max_ratio,
        unconditional=unconditional,
        ratio=ratio,
        stable=unconditional or ratio < max_ratio,
        sup_gain=float(np.max(gains)),
        gains=gains,
    )


def effective_spacing(grid: Grid) -> float:
    """Pas h / max(s_j) : le rapport local s_j^2 k / h^2 gouverne la stabilité des grilles étirées."""
    if grid.noise_scale is None:
        return grid.h
    return grid.h / float(np.max(grid.noise_scale))


def check_stable(grid: Grid, scheme: SchemeParams, params: ModelParams, k: float) -> StabilityReport:
    """Contrôle préalable d'un calcul ; lève StabilityViolationError hors région de stabilité."""
    report = classify(params.rho, scheme.theta, scheme.sigma, k, effective_spacing(grid))
    if not report.stable:
        raise StabilityViolationError(
            f'k/h^2 = {report.ratio:.6g} dépasse la borne {report.max_ratio:.6g} '
            f'pour theta={scheme.theta}, sigma={scheme.sigma}, rho={params.rho}')
    return report


def empirical_mode_decay(phi: float, k: float, h: float, rho: float, theta: float, sigma: float,
                         n_steps: int, n_samples: int, seed: int) -> ModeDecayEstimate:
    """
    Estimation Monte Carlo de (E|X_n|^2)^(1/n) par la récurrence scalaire

        X_{n+1} = X_n [1 + k a (1-theta) - sqrt(k) i c Z - k rho a ((1-sigma) - Z^2)] / [1 - k a theta + k rho a sigma].

    Un débordement (régime instable) donne un taux infini, pas une erreur.
    """
    _check_rho(rho)
    require(n_samples >= 1000, f'au moins 1000 échantillons requis, reçu {n_samples}')
    require(n_steps >= 1, 'au moins un pas requis')
    a = -2.0 / (h * h) * math.sin(phi / 2.0) ** 2
    c = math.sqrt(rho) / h * math.sin(phi)
    denominator = 1.0 - k * a * theta + k * rho * a * sigma
    if abs(denominator) < 1e-14:
        raise SingularSystemError('dénominateur nul dans la récurrence de mode')

    z = stream(seed, purpose=Purpose.MODE_DECAY).standard_normal((n_samples, n_steps))
    x = np.ones(n_samples, dtype=complex)
    with np.errstate(over='ignore', invalid='ignore'):
        for n in range(n_steps):
            zn = z[:, n]
            x *= (1.0 + k * a * (1.0 - theta) - math.sqrt(k) * 1j * c * zn
                  - k * rho * a * ((1.0 - sigma) - zn * zn)) / denominator
        energy = np.abs(x) ** 2
        mean = float(np.mean(energy))
        if not math.isfinite(mean):
            return ModeDecayEstimate(math.inf, math.inf, n_steps, n_samples)
        mean_stderr = float(np.std(energy, ddof=1)) / math.sqrt(n_samples)
    if mean == 0.0:
        return ModeDecayEstimate(0.0, 0.0, n_steps, n_samples)
    rate = mean ** (1.0 / n_steps)
    stderr = rate / (n_steps * mean) * mean_stderr
    return ModeDecayEstimate(rate, stderr, n_steps, n_samples)
