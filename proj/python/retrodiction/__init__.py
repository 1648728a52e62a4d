"""Bayesian retrodiction, reverse processes and fluctuation relations.

Thin Python layer over the C++ core. Matrices are NumPy arrays; channels are
row-stochastic (``phi[x, y]`` is the probability of ``y`` given ``x``).
"""

import json as _json

from ._retrodiction import (
    RetroError,
    amplitude_damping,
    apply_kraus,
    bayes_reverse,
    classical_scenario,
    f_family,
    haar_unitary,
    hybrid_reversal,
    microcanonical,
    parse_scenario,
    petz_reverse,
    random_channel,
    steady_state,
    tasaki,
    two_measurement,
)
from ._retrodiction import run_scenario_file as _run_scenario_file

__all__ = [
    "RetroError",
    "amplitude_damping",
    "apply_kraus",
    "bayes_reverse",
    "classical_scenario",
    "f_family",
    "haar_unitary",
    "hybrid_reversal",
    "microcanonical",
    "parse_scenario",
    "petz_reverse",
    "random_channel",
    "run_scenario_file",
    "steady_state",
    "tasaki",
    "two_measurement",
]


def run_scenario_file(path, out_dir, seed=None, tol=None, plot=False):
    """Run a scenario file and return the parsed summary report."""
    return _json.loads(_run_scenario_file(str(path), str(out_dir), seed, tol, plot))
