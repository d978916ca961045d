"""Python access to the gfpk solver core."""

import json as _json

from ._gfpk import (
    ArgumentError,
    ChaosDensity,
    ConfigError,
    Error,
    NumericError,
    SizeError,
    SolverError,
    __version__,
    b1_bound,
    basis_size,
    enumerate_basis,
    hermite,
    l2_distance,
    sigma_infinity,
)
from ._gfpk import _run


def run(config, output_dir=None):
    """Run a configuration dict. Returns (exit_code, report dict, artifact paths)."""
    code, report, artifacts = _run(_json.dumps(config), output_dir or "")
    return code, _json.loads(report), list(artifacts)


def load_density(path):
    with open(path, encoding="utf-8") as fh:
        return ChaosDensity.from_json(fh.read())


__all__ = [
    "ArgumentError",
    "ChaosDensity",
    "ConfigError",
    "Error",
    "NumericError",
    "SizeError",
    "SolverError",
    "__version__",
    "b1_bound",
    "basis_size",
    "enumerate_basis",
    "hermite",
    "l2_distance",
    "load_density",
    "run",
    "sigma_infinity",
]
