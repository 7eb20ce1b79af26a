import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import click

from src.commands.common import fail
from src.commands.pricing_commands import price
from src.commands.solve_commands import solve
from src.commands.stability_commands import mode_decay, stability
from src.commands.study_commands import converge
from src.config import build_default_map, load_config_file
from src.errors import SpdeError


@click.group()
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Fichier clé=valeur ; les options explicites le remplacent.')
@click.option('--verbose', is_flag=True, default=False, help='Journalisation DEBUG.')
@click.pass_context
def cli(ctx, config_path, verbose):
    """Schémas de Milstein theta-sigma pour une EDPS parabolique linéaire."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s : %(message)s',
        stream=sys.stderr,
    )
    if config_path:
        try:
            options = {name: [param.name for param in command.params] for name, command in cli.commands.items()}
            ctx.default_map = build_default_map(load_config_file(config_path), options)
        except SpdeError as e:
            fail(e)


# Enregistrement des commandes
cli.add_command(stability)
cli.add_command(mode_decay)
cli.add_command(converge)
cli.add_command(price)
cli.add_command(solve)


if __name__ == '__main__':
    cli()
