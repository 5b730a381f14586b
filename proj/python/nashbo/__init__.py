"""Equilibrium search in black-box games.

Thin wrapper over the C++ core. ``run`` executes one seeded trial in memory;
``run_experiment``, ``plot``, ``summarize`` and ``verify`` work on trace
directories in the same format the ``nashbo`` command writes.
"""

from ._nashbo import (
    ConfigError,
    Game,
    ModelError,
    __version__,
    gp_posterior,
    plot,
    run,
    run_experiment,
    summarize,
    theoretical_beta,
    verify,
)

__all__ = [
    "ConfigError",
    "Game",
    "ModelError",
    "__version__",
    "gp_posterior",
    "plot",
    "run",
    "run_experiment",
    "summarize",
    "theoretical_beta",
    "verify",
]
