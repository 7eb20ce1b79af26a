"""
Valeurs par défaut des commandes et lecture du fichier de configuration
plat `clé=valeur`.
"""

import logging
import math
from pathlib import Path
from typing import Dict, Iterable

from src.errors import DomainError
from src.models import ModelParams, TrancheSpec

logger = logging.getLogger(__name__)

# Problème sur la droite réelle (tests de convergence)
REFERENCE = {
    'rho': 0.2,
    'mu': 0.081,
    'x0': 5.0,
    'x_lo': -16.0 / 3.0,
    'x_hi': 16.0,
    'T': 5.0,
    'h0': 4.0 / 3.0,
    'k0': 0.25,
}

# Problème absorbant sur [0, 16] (tranche de CDO)
CREDIT = {
    'x_lo': 0.0,
    'x_hi': 16.0,
    'h0': 8.0 / 5.0,
    'k0': 0.25,
    'a': 0.0,
    'd': 0.03,
    'r': 0.042,
    'q': 0.25,
    'n': 20,
    'theta': 0.5,
    'sigma': -1.0,
}

CONVERGENCE_SAMPLES = 1000
CHUNK_SIZE = 250


def reference_model(**overrides) -> ModelParams:
    values = {key: REFERENCE[key] for key in ('mu', 'rho', 'x0', 'x_lo', 'x_hi', 'T')}
    values.update(overrides)
    return ModelParams(**values)


def credit_model(**overrides) -> ModelParams:
    values = {
        'mu': REFERENCE['mu'], 'rho': REFERENCE['rho'], 'x0': REFERENCE['x0'],
        'x_lo': CREDIT['x_lo'], 'x_hi': CREDIT['x_hi'], 'T': CREDIT['n'] * CREDIT['q'],
    }
    values.update(overrides)
    return ModelParams(**values)


def credit_tranche(**overrides) -> TrancheSpec:
    values = {key: CREDIT[key] for key in ('a', 'd', 'r', 'q', 'n')}
    values.update(overrides)
    return TrancheSpec(**values)


def default_level_samples(level: int) -> int:
    """N_l = max(100, 10^4 4^-l)."""
    return max(100, int(math.floor(1e4 * 4.0 ** (-level))))


def load_config_file(path: str) -> Dict[str, str]:
    """
    Lit un fichier `clé=valeur` ; les lignes vides et les commentaires `#` sont ignorés.

    Args:
        path (str): Chemin du fichier

    Returns:
        Dict[str, str]: Valeurs brutes, clés normalisées (tirets remplacés par des soulignés)
    """
    values = {}
    for number, raw in enumerate(Path(path).read_text(encoding='utf-8').splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise DomainError(f'{path}:{number} : ligne sans "=" : {raw.strip()}')
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise DomainError(f'{path}:{number} : clé vide')
        values[key.replace('-', '_').lower()] = value
    logger.debug('Configuration chargée depuis %s : %s', path, sorted(values))
    return values


def build_default_map(values: Dict[str, str], commands: Dict[str, Iterable[str]]) -> Dict[str, Dict[str, str]]:
    """
    Répartit les valeurs du fichier entre les commandes qui déclarent l'option.

    Une clé qu'aucune commande ne connaît est une erreur.
    """
    known = set()
    default_map = {}
    for name, options in commands.items():
        options = set(options)
        known |= options
        default_map[name] = {key: value for key, value in values.items() if key in options}
    unknown = sorted(set(values) - known)
    if unknown:
        raise DomainError(f'clé(s) inconnue(s) dans la configuration : {", ".join(unknown)}')
    return default_map
