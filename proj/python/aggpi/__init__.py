"""Prediction intervals for the mean of the next m values of a time series."""

import json

from ._core import (
    Error,
    PredictionInterval,
    alpha_stable,
    fit_lad,
    fit_lasso,
    fit_lasso_cv,
    fit_ols,
    longrun_sd,
    nagaev_bound,
    pi_adj,
    pi_clt,
    pi_qtl,
    preset_names,
)
from . import _core

__all__ = [
    "Error",
    "PredictionInterval",
    "alpha_stable",
    "cli",
    "fit_lad",
    "fit_lasso",
    "fit_lasso_cv",
    "fit_ols",
    "longrun_sd",
    "nagaev_bound",
    "pi_adj",
    "pi_clt",
    "pi_qtl",
    "preset_names",
    "run_experiment",
]


def run_experiment(config, jobs=1):
    """Monte Carlo coverage experiment.

    `config` is a preset name or a dict in the JSON config schema (it may
    itself name a "preset" and override fields). Returns one dict per
    (estimator, method, m) cell.
    """
    if isinstance(config, str):
        config = {"preset": config}
    return _core._run_experiment(json.dumps(config), jobs)


def cli(*args):
    """Runs the command-line tool in-process; returns (exit_code, stdout, stderr)."""
    return _core._cli([str(a) for a in args])
