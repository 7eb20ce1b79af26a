"""
Commande `solve` : champ terminal d'une trajectoire, pour tracé externe.
"""

import logging

import click
import numpy as np

from src import config
from src.commands.common import emit, fail, model_options, variant_option
from src.errors import SpdeError, require
from src.models import BoundaryKind, SchemeParams
from src.numerics.exact import dirac_hat_projection, exact_solution
from src.numerics.harness import level_grid, level_sequence, sample_path
from src.numerics.scheme import run
from src.numerics.stability import check_stable

logger = logging.getLogger(__name__)


@click.command('solve')
@model_options
@click.option('--theta', type=float, default=0.5, show_default=True)
@click.option('--sigma', type=float, default=-1.0, show_default=True)
@variant_option
@click.option('--alpha', type=float, default=1.0, show_default=True,
              help="Exposant d'étirement (alpha < 1 implique --bounded).")
@click.option('--level', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--bounded', is_flag=True, default=False, help='Frontière absorbante en 0.')
@click.option('--periodic', is_flag=True, default=False, help='Conditions périodiques (grille uniforme).')
@click.option('--path-index', type=click.IntRange(min=0), default=0, show_default=True,
              help='Indice de la trajectoire dans le flux.')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--json', 'as_json', is_flag=True, default=False)
@click.option('--force', is_flag=True, default=False, help='Ignore le contrôle préalable de stabilité.')
def solve(rho, mu, x0, theta, sigma, variant, alpha, level, bounded, periodic, path_index, seed,
          out, as_json, force):
    """Résout une trajectoire et écrit le champ terminal (x_j, v_j)."""
    try:
        bounded = bounded or alpha != 1.0
        require(not (bounded and periodic), '--periodic est incompatible avec --bounded et --alpha')
        overrides = {key: value for key, value in (('rho', rho), ('mu', mu), ('x0', x0)) if value is not None}
        if bounded:
            params = config.credit_model(**overrides)
            h0, k0 = config.CREDIT['h0'], config.CREDIT['k0']
        else:
            params = config.reference_model(**overrides)
            h0, k0 = config.REFERENCE['h0'], config.REFERENCE['k0']
        bc = BoundaryKind.PERIODIC if periodic else BoundaryKind.DIRICHLET
        scheme = SchemeParams(theta=theta, sigma=sigma, ito_variant=variant, bc=bc)
        grid = level_grid(params, level, h0, alpha)
        _, k = level_sequence(level, h0, k0)
        if not force:
            check_stable(grid, scheme, params, k)

        path = sample_path(params.T, k, seed, level=level, index=path_index)
        final = run(dirac_hat_projection(grid, params.x0), path, scheme, params, observe=[path.n_steps])[-1]
        logger.info('Champ terminal : %d pas, grille %r', path.n_steps, grid)

        x = grid.physical_nodes
        v = final.values
        summary = {'M_T': float(path.terminal_value()), 'mass': float(final.mass(periodic=periodic))}
        if grid.is_uniform:
            columns = ['x', 'v']
            rows = [{'x': xj, 'v': vj} for xj, vj in zip(x.tolist(), v.tolist())]
        else:
            columns = ['y', 'x', 'v']
            rows = [{'y': yj, 'x': xj, 'v': vj} for yj, xj, vj in zip(grid.nodes.tolist(), x.tolist(), v.tolist())]

        if not bounded and not periodic:
            exact = exact_solution(params, params.T, path.terminal_value(), x)
            error = v - exact
            columns += ['exact', 'error']
            for row, ej, dj in zip(rows, exact.tolist(), error.tolist()):
                row['exact'] = ej
                row['error'] = dj
            summary['max_error'] = float(np.max(np.abs(error)))
        if bounded:
            summary['loss'] = 1.0 - summary['mass']

        metadata = {
            'command': 'solve',
            'seed': seed,
            'path_index': path_index,
            'level': level,
            'scheme': scheme.label,
            **scheme.to_dict(),
            **params.to_dict(),
            **grid.to_dict(),
            'k': k,
        }
        emit(rows, columns, metadata, out=out, as_json=as_json, summary=summary)
    except SpdeError as e:
        fail(e)
