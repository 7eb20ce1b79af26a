"""
Flux aléatoires à compteur (Philox) indexés par (graine, niveau, trajectoire, usage).

Deux appels avec la même clé produisent les mêmes tirages, quel que soit
l'ordre ou le nombre de threads qui les évaluent.
"""

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    BROWNIAN = 1
    IDIOSYNCRATIC = 2
    MODE_DECAY = 3


def stream(seed: int, level: int = 0, index: int = 0, purpose: Purpose = Purpose.BROWNIAN) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed), int(level), int(index), int(purpose)])
    return np.random.Generator(np.random.Philox(key))
