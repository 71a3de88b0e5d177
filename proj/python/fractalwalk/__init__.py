"""Random matrix walks, twisted lattices, and certified continued-fraction
statistics.

The heavy lifting lives in the compiled extension ``fractalwalk._core``; this
package re-exports its surface and adds a small convenience wrapper around the
experiment runner.
"""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    System,
    cf_digits,
    coding_point,
    contraction_on_average,
    experiments,
    flow_systoles,
    lyapunov_spectrum,
    run,
    sample_word,
    similarity_dimension,
    system,
    walk_matrices,
    walk_systoles,
    __version__,
)


def run_experiment(**config):
    """Run one experiment; keyword arguments mirror the CLI flags.

    Returns the manifest as a parsed dict, with the raw CSV text under the
    ``"csv"`` key and the pass flag under ``"pass"``.
    """
    raw = run(config)
    manifest = _json.loads(raw["manifest_json"])
    manifest["csv"] = raw["csv"]
    manifest["pass"] = raw["pass"]
    manifest["exit_code"] = raw["exit_code"]
    return manifest


__all__ = [
    "ConfigError",
    "System",
    "cf_digits",
    "coding_point",
    "contraction_on_average",
    "experiments",
    "flow_systoles",
    "lyapunov_spectrum",
    "run",
    "run_experiment",
    "sample_word",
    "similarity_dimension",
    "system",
    "walk_matrices",
    "walk_systoles",
    "__version__",
]
