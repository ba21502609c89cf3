"""Finite-difference variational solver for the stationary Zakharov equation.

Fields are numpy vectors of interior nodal values on the grid of an
``OperatorSet``.
"""

import json

from ._zakharov import (
    BelowThresholdError,
    BoundaryKind,
    DomainSpec,
    Functional,
    ModelParams,
    OperatorSet,
    SolverConfig,
    SolverError,
    Spectrum,
    ValidationError,
    energy,
    energy_identity_gap,
    fibering_project,
    global_minimize_e2,
    gradient,
    hess_vec,
    morse_index,
    mountain_pass,
    multiplicity_search,
    nehari_descent,
    nehari_residual,
    nonexistence_certificate,
    solve_spectrum,
)
from ._zakharov import run as _run


def run(config):
    """Run a task from a config dict (same schema as the CLI); returns (exit_code, record).

    An invalid config raises ValidationError; the CLI reports it as exit code 2.
    """
    code, record = _run(json.dumps(config))
    return code, json.loads(record)


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
