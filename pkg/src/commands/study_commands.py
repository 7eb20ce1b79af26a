"""
Commande `converge` : erreurs en moyenne quadratique E_l^2 (contre la
solution exacte) et e_l^2 (deux grilles emboîtées) par niveau et par schéma.
"""

import logging
from typing import Dict, List

import click
import numpy as np

from src import config
from src.commands.common import SCHEMES, emit, fail, model_options, run_options, selected_schemes, variant_option
from src.errors import SpdeError
from src.models import SchemeParams
from src.numerics.grid import build_uniform
from src.numerics.harness import error_exact, error_two_grid, level_sequence
from src.numerics.stability import check_stable

logger = logging.getLogger(__name__)


def _slope(levels: List[int], values: List[float]):
    """Pente des moindres carrés de log2(valeur) en fonction du niveau."""
    points = [(l, v) for l, v in zip(levels, values) if v is not None and v > 0.0]
    if len(points) < 2:
        return None
    x, y = zip(*points)
    return float(np.polyfit(np.asarray(x, dtype=float), np.log2(y), 1)[0])


@click.command('converge')
@model_options
@click.option('--theta', type=float, default=None, help='Schéma personnalisé (avec --sigma).')
@click.option('--sigma', type=float, default=None, help='Schéma personnalisé (avec --theta).')
@click.option('--scheme', 'scheme_names', type=click.Choice(list(SCHEMES)), multiple=True,
              default=tuple(SCHEMES), show_default=True, help='Schémas nommés à comparer.')
@variant_option
@click.option('--levels', type=click.IntRange(min=2), default=4, show_default=True,
              help='Nombre de niveaux (au moins 2).')
@click.option('--first-level', type=click.IntRange(min=0), default=1, show_default=True)
@click.option('--samples', type=click.IntRange(min=2), default=config.CONVERGENCE_SAMPLES,
              show_default=True, help='Nombre M de trajectoires par niveau.')
@click.option('--bounded', is_flag=True, default=False,
              help='Problème absorbant sur [0, x_hi] : seule la mesure e^2 est calculée.')
@run_options
def converge(rho, mu, x0, theta, sigma, scheme_names, variant, levels, first_level, samples, bounded,
             seed, threads, out, as_json, force):
    """Étude de convergence en moyenne quadratique."""
    try:
        overrides = {key: value for key, value in (('rho', rho), ('mu', mu), ('x0', x0)) if value is not None}
        if bounded:
            overrides['x_lo'] = config.CREDIT['x_lo']
        params = config.reference_model(**overrides)
        h0, k0 = config.REFERENCE['h0'], config.REFERENCE['k0']
        schemes = [SchemeParams(theta=t, sigma=s, ito_variant=variant)
                   for t, s in selected_schemes(scheme_names, theta, sigma)]
        level_range = list(range(first_level, first_level + levels))

        if not force:
            for scheme in schemes:
                for level in level_range:
                    h, k = level_sequence(level, h0, k0)
                    J = int(round((params.x_hi - params.x_lo) / h))
                    check_stable(build_uniform(params.x_lo, params.x_hi, J), scheme, params, k)

        rows: List[Dict] = []
        summary = {}
        for scheme in schemes:
            exact_values, two_grid_values = [], []
            for level in level_range:
                logger.info('Niveau %d, schéma %s', level, scheme.label)
                exact = None if bounded else error_exact(level, samples, scheme, params, seed,
                                                         h0=h0, k0=k0, threads=threads)
                two_grid = error_two_grid(level, samples, scheme, params, seed, h0=h0, k0=k0, threads=threads)
                rows.append({
                    'level': level,
                    'h': two_grid.h,
                    'k': two_grid.k,
                    'E2': exact.value if exact else None,
                    'E2_stderr': exact.stderr if exact else None,
                    'e2': two_grid.value,
                    'e2_stderr': two_grid.stderr,
                    'scheme': scheme.label,
                })
                exact_values.append(exact.value if exact else None)
                two_grid_values.append(two_grid.value)
            if not bounded:
                summary[f'slope_E2[{scheme.label}]'] = _slope(level_range, exact_values)
            summary[f'slope_e2[{scheme.label}]'] = _slope(level_range, two_grid_values)

        metadata = {
            'command': 'converge',
            'seed': seed,
            'M': samples,
            **params.to_dict(),
            'h0': h0,
            'k0': k0,
            'variant': variant,
            'bounded': bounded,
        }
        emit(rows, ['level', 'h', 'k', 'E2', 'E2_stderr', 'e2', 'e2_stderr', 'scheme'], metadata,
             out=out, as_json=as_json, summary=summary)
    except SpdeError as e:
        fail(e)
