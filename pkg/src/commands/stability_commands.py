"""
Commandes `stability` (régions de stabilité en forme fermée) et
`mode-decay` (taux de croissance empirique d'un mode de Fourier).
"""

import logging
import math

import click

from src.commands.common import emit, fail
from src.errors import DomainError, SpdeError, require
from src.models import SchemeParams
from src.numerics.stability import amplification, empirical_mode_decay, stability_function, stability_limit

logger = logging.getLogger(__name__)


@click.command('stability')
@click.option('--theta', type=float, default=0.0, show_default=True, help='Poids implicite de la dérive.')
@click.option('--sigma', type=float, default=0.0, show_default=True, help="Poids de l'intégrale double.")
@click.option('--rho-min', type=float, default=0.0, show_default=True)
@click.option('--rho-max', type=float, default=0.99, show_default=True)
@click.option('--steps', type=int, default=99, show_default=True, help="Nombre d'intervalles du balayage en rho.")
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Fichier de sortie.')
@click.option('--json', 'as_json', is_flag=True, default=False, help='Sortie JSON.')
def stability(theta, sigma, rho_min, rho_max, steps, out, as_json):
    """Borne sur k/h^2 en fonction de rho pour un couple (theta, sigma)."""
    try:
        scheme = SchemeParams(theta=theta, sigma=sigma)
        require(steps >= 1, f'au moins un intervalle de balayage, reçu {steps}')
        require(0.0 <= rho_min <= rho_max < 1.0,
                f'il faut 0 <= rho-min <= rho-max < 1, reçu [{rho_min}, {rho_max}]')

        rows = []
        for i in range(steps + 1):
            rho = rho_min + i * (rho_max - rho_min) / steps
            f = stability_function(rho, scheme.theta, scheme.sigma)
            limit = stability_limit(rho, scheme.theta, scheme.sigma)
            rows.append({
                'rho': rho,
                'theta': scheme.theta,
                'sigma': scheme.sigma,
                'f': f,
                'limit': None if math.isinf(limit) else limit,
                'unconditional': f <= 0.0,
            })
        logger.info('Balayage de stabilité %s : %d valeurs de rho', scheme.label, len(rows))
        emit(rows, ['rho', 'theta', 'sigma', 'f', 'limit', 'unconditional'],
             {'command': 'stability', 'scheme': scheme.label}, out=out, as_json=as_json)
    except SpdeError as e:
        fail(e)


@click.command('mode-decay')
@click.option('--rho', type=float, default=0.2, show_default=True)
@click.option('--theta', type=float, default=0.0, show_default=True)
@click.option('--sigma', type=float, default=0.0, show_default=True)
@click.option('--phi', type=float, default=math.pi, show_default=True, help='Angle du mode.')
@click.option('--h', 'h', type=float, default=1.0, show_default=True, help="Pas d'espace.")
@click.option('--lambda', 'lambdas', type=float, multiple=True,
              help='Rapport k/h^2 (option répétable ; remplace le balayage).')
@click.option('--lambda-min', type=float, default=0.5, show_default=True)
@click.option('--lambda-max', type=float, default=1.5, show_default=True)
@click.option('--points', type=int, default=11, show_default=True, help='Nombre de points du balayage.')
@click.option('--n-steps', type=int, default=50, show_default=True, help='Nombre de pas de la récurrence.')
@click.option('--samples', type=int, default=10000, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--json', 'as_json', is_flag=True, default=False)
def mode_decay(rho, theta, sigma, phi, h, lambdas, lambda_min, lambda_max, points, n_steps, samples,
               seed, out, as_json):
    """Compare le facteur G(phi) en forme fermée au taux estimé par Monte Carlo."""
    try:
        scheme = SchemeParams(theta=theta, sigma=sigma)
        require(h > 0.0, f'le pas h doit être positif, reçu {h}')
        if not lambdas:
            require(points >= 2 and 0.0 < lambda_min < lambda_max,
                    'balayage en lambda invalide')
            lambdas = [lambda_min + i * (lambda_max - lambda_min) / (points - 1) for i in range(points)]

        rows = []
        for lam in lambdas:
            if lam <= 0.0:
                raise DomainError(f'lambda doit être positif, reçu {lam}')
            k = lam * h * h
            estimate = empirical_mode_decay(phi, k, h, rho, scheme.theta, scheme.sigma,
                                            n_steps=n_steps, n_samples=samples, seed=seed)
            rows.append({
                'lambda': lam,
                'k': k,
                'G': amplification(phi, k, h, rho, scheme.theta, scheme.sigma),
                'rate': estimate.rate,
                'stderr': estimate.stderr,
            })
            logger.debug('lambda=%g : G=%.6g taux=%.6g', lam, rows[-1]['G'], estimate.rate)

        metadata = {'command': 'mode-decay', 'scheme': scheme.label, 'rho': rho, 'phi': phi, 'h': h,
                    'n_steps': n_steps, 'samples': samples, 'seed': seed}
        emit(rows, ['lambda', 'k', 'G', 'rate', 'stderr'], metadata, out=out, as_json=as_json)
    except SpdeError as e:
        fail(e)
