"""Random automata for property checks and experiments."""
from __future__ import annotations

import random

from .automaton import SafetyAutomaton, alphabet, trim


def random_automaton(rng: random.Random, base: int = 2, arity: int = 1,
                     max_states: int = 6, density: float = 0.6) -> SafetyAutomaton:
    """A nonempty trim automaton with at most ``max_states`` states.

    Each letter is defined at each state with probability ``density``.
    """
    letters = alphabet(base, arity)
    while True:
        n = rng.randint(1, max_states)
        rows = []
        for _ in range(n):
            rows.append({a: rng.randrange(n) for a in letters if rng.random() < density})
        a = trim(SafetyAutomaton(base, arity, 0, tuple(rows)))
        if not a.is_empty:
            return a
