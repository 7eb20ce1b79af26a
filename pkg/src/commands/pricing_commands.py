"""
Commande `price` : estimateur multiniveau de la jambe de spread d'une
tranche de CDO.
"""

import logging
import math

import click

from src import config
from src.commands.common import emit, fail, model_options, run_options, variant_option
from src.errors import SpdeError
from src.models import SchemeParams
from src.numerics.credit import LossDiagnostics, price_level, tranche_payoff
from src.numerics.harness import combine_levels, optimal_samples
from src.numerics.stability import check_stable

logger = logging.getLogger(__name__)

COLUMNS = ['level', 'alpha', 'N_l', 'mean_Yl', 'V_l', 'stderr', 'cost',
           'loss_clamped', 'monotonicity_violations', 'worst_loss_drop']


@click.command('price')
@model_options
@click.option('--theta', type=float, default=config.CREDIT['theta'], show_default=True)
@click.option('--sigma', type=float, default=config.CREDIT['sigma'], show_default=True)
@variant_option
@click.option('--alpha', type=float, default=1.0, show_default=True,
              help="Exposant d'étirement y = x**alpha (1 : grille uniforme).")
@click.option('--levels', type=click.IntRange(min=1), default=4, show_default=True,
              help='Nombre de niveaux 0..L-1.')
@click.option('--samples', type=click.IntRange(min=2), default=None,
              help='N_l identique pour tous les niveaux (défaut : max(100, 10^4 4^-l)).')
@click.option('--attachment', type=float, default=config.CREDIT['a'], show_default=True)
@click.option('--detachment', type=float, default=config.CREDIT['d'], show_default=True)
@click.option('--eps', type=float, default=None,
              help='Précision cible : ajoute au résumé l\'allocation optimale indicative des N_l.')
@run_options
def price(rho, mu, x0, theta, sigma, variant, alpha, levels, samples, attachment, detachment, eps,
          seed, threads, out, as_json, force):
    """Prix de la jambe de spread par Monte Carlo multiniveau."""
    try:
        overrides = {key: value for key, value in (('rho', rho), ('mu', mu), ('x0', x0)) if value is not None}
        params = config.credit_model(**overrides)
        tranche = config.credit_tranche(a=attachment, d=detachment)
        scheme = SchemeParams(theta=theta, sigma=sigma, ito_variant=variant)
        diagnostics = LossDiagnostics()
        payoff = tranche_payoff(params, scheme, tranche, alpha=alpha,
                                h0=config.CREDIT['h0'], k0=config.CREDIT['k0'], diagnostics=diagnostics)

        if not force:
            for level in range(levels):
                check_stable(payoff.grid(level), scheme, params, payoff.time_step(level))

        estimates = []
        for level in range(levels):
            n_samples = samples or config.default_level_samples(level)
            estimates.append(price_level(level, n_samples, scheme, params, tranche, alpha=alpha, seed=seed,
                                         threads=threads, payoff=payoff))

        estimate, variance = combine_levels(estimates)
        summary = {
            'estimate': estimate,
            'variance': variance,
            'stderr': math.sqrt(variance),
            'alpha': alpha,
            'loss_clamped': sum(e.diagnostics['loss_clamped'] for e in estimates),
            'monotonicity_violations': sum(e.diagnostics['monotonicity_violations'] for e in estimates),
            'worst_loss_drop': max(e.diagnostics['worst_loss_drop'] for e in estimates),
        }
        if eps is not None:
            advice = optimal_samples([e.variance for e in estimates], [e.cost for e in estimates], eps)
            summary['optimal_N_l'] = ' '.join(str(n) for n in advice) if not as_json else advice
        logger.info('Prix multiniveau : %.8g +- %.2e', estimate, math.sqrt(variance))

        metadata = {
            'command': 'price',
            'seed': seed,
            'scheme': scheme.label,
            **scheme.to_dict(),
            **params.to_dict(),
            **tranche.to_dict(),
            'h0': config.CREDIT['h0'],
            'k0': config.CREDIT['k0'],
        }
        emit([e.to_dict() for e in estimates], COLUMNS, metadata, out=out, as_json=as_json, summary=summary)
    except SpdeError as e:
        fail(e)
