"""
Exceptions du solveur et correspondance avec les codes de sortie de la CLI.
"""


class SpdeError(Exception):
    """Erreur de base de la bibliothèque."""

    exit_code = 1


class DomainError(SpdeError, ValueError):
    """Précondition violée (paramètre hors domaine, tailles incohérentes...)."""

    exit_code = 2


class StabilityViolationError(SpdeError):
    """Paramètres hors de la région de stabilité en moyenne quadratique."""

    exit_code = 3


class SingularSystemError(SpdeError):
    """Pivot quasi nul pendant l'élimination, ou dénominateur nul."""

    exit_code = 4


class NumericalOverflowError(SpdeError):
    """Valeurs non finies après un pas de temps (instabilité)."""

    exit_code = 4

    def __init__(self, message: str, step_index: int = -1):
        super().__init__(message)
        self.step_index = step_index


def require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)
