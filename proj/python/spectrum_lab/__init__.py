"""Spectrum licensing market laboratory: fees, auctions, equilibrium and estimation."""

import json

import numpy as np

from ._core import (
    ExogenousProfile,
    SpectrumError,
    StructuralParameters,
    annuitize,
    comparative_statics,
    externality_fixed_point,
    fee_per_subscriber,
    gen_data,
    hhi,
    reference_means,
    reference_parameters,
    solve_equilibrium,
    total_cost_horizon,
)
from . import _core

__all__ = [
    "ExogenousProfile",
    "SpectrumError",
    "StructuralParameters",
    "annuitize",
    "comparative_statics",
    "estimate",
    "externality_fixed_point",
    "fee_per_subscriber",
    "gen_data",
    "hhi",
    "ols",
    "recovery_experiment",
    "reduced_form",
    "reference_means",
    "reference_parameters",
    "run_auction",
    "solve_equilibrium",
    "total_cost_horizon",
]


def reduced_form(params):
    return json.loads(_core._reduced_form(params))


def run_auction(config, bidders, seed, trace=False):
    """config and bidders use the same layout as the CLI JSON files."""
    return json.loads(_core._run_auction(json.dumps(config), json.dumps(bidders), int(seed), bool(trace)))


def ols(y, x, names=None):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return json.loads(_core._ols(y, x, list(names or [])))["equations"][0]


def estimate(data, method="3sls", lenient=False):
    """Fit the supply/demand system to a dict of columns (qS, pW, CL, ...)."""
    cols = {k: np.asarray(v, dtype=float) for k, v in data.items()}
    return json.loads(_core._estimate(method, cols, bool(lenient)))


def recovery_experiment(n, replications, seed, threads=1):
    return json.loads(_core._recovery_experiment(int(n), int(replications), int(seed), int(threads)))
