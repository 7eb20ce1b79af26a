"""
Options partagées, écriture CSV/JSON et traitement des erreurs des commandes.
"""

import json
import logging
import math
from typing import Any, Dict, Iterable, List, NoReturn, Optional, Sequence

import click

from src.errors import SpdeError

logger = logging.getLogger(__name__)

SCHEMES = {
    'expl': (0.0, 0.0),
    'impl': (1.0, 0.0),
    'CN': (0.5, -1.0),
}


def fmt(value: Any) -> str:
    """Format décimal aller-retour (17 chiffres significatifs)."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return format(value, '.17g')
    return str(value)


def _json_ready(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    return value


def emit(rows: Sequence[Dict[str, Any]], columns: Sequence[str], metadata: Dict[str, Any],
         out: Optional[str] = None, as_json: bool = False,
         summary: Optional[Dict[str, Any]] = None) -> None:
    """
    Écrit les lignes en CSV (métadonnées en tête, préfixées par '#') ou en JSON.

    Args:
        rows (Sequence[Dict]): Lignes du tableau
        columns (Sequence[str]): Ordre des colonnes
        metadata (Dict): Paramètres de l'exécution
        out (str): Fichier de sortie (stdout si absent)
        as_json (bool): Document JSON au lieu du CSV
        summary (Dict): Résumé ajouté après le tableau
    """
    if as_json:
        document = {'metadata': metadata, 'rows': [{c: row.get(c) for c in columns} for row in rows]}
        if summary is not None:
            document['summary'] = summary
        text = json.dumps(_json_ready(document), indent=2, sort_keys=False) + '\n'
    else:
        lines = [f'# {key}={fmt(value)}' for key, value in metadata.items()]
        lines.append(','.join(columns))
        lines.extend(','.join(fmt(row.get(c)) for c in columns) for row in rows)
        if summary is not None:
            lines.extend(f'# {key}={fmt(value)}' for key, value in summary.items())
        text = '\n'.join(lines) + '\n'

    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        logger.info('Résultats écrits dans %s', out)
    else:
        click.echo(text, nl=False)


def fail(error: SpdeError) -> NoReturn:
    """Message d'erreur sur stderr et code de sortie associé à l'exception."""
    click.echo(f'Erreur : {error}', err=True)
    raise click.exceptions.Exit(error.exit_code)


def selected_schemes(names: Iterable[str], theta: Optional[float], sigma: Optional[float]) -> List[tuple]:
    """(theta, sigma) explicites, sinon les schémas nommés."""
    if theta is not None or sigma is not None:
        return [(0.0 if theta is None else theta, 0.0 if sigma is None else sigma)]
    return [SCHEMES[name] for name in names]


def model_options(command):
    options = [
        click.option('--rho', type=float, default=None, help='Corrélation rho dans [0, 1).'),
        click.option('--mu', type=float, default=None, help='Dérive mu.'),
        click.option('--x0', type=float, default=None, help='Position initiale du Dirac.'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def run_options(command):
    options = [
        click.option('--seed', type=int, default=0, show_default=True, help='Graine des flux aléatoires.'),
        click.option('--threads', type=click.IntRange(min=1), default=1, show_default=True,
                     help='Nombre de threads de calcul.'),
        click.option('--out', type=click.Path(dir_okay=False), default=None, help='Fichier de sortie.'),
        click.option('--json', 'as_json', is_flag=True, default=False, help='Sortie JSON.'),
        click.option('--force', is_flag=True, default=False,
                     help='Ignore le contrôle préalable de stabilité.'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def variant_option(command):
    return click.option('--variant', type=click.Choice(['compact', 'iterated']), default='compact',
                        show_default=True, help="Stencil du terme d'Itô.")(command)
