"""Generalizing policy learning for relationally structured planning problems.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. Domains, states, policies and training sets travel in the same
text formats the `relpol` CLI reads and writes.
"""

from relpol._core import (
    Domain,
    ResourceError,
    Rng,
    State,
    ToolkitError,
    builtin_domains,
    count_bw_states,
    evaluate,
    generate_training,
    learn,
    run_experiment,
    sample_problem,
    uniform_bw_state,
)

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "ResourceError",
    "Rng",
    "State",
    "ToolkitError",
    "builtin_domains",
    "count_bw_states",
    "evaluate",
    "generate_training",
    "learn",
    "run_experiment",
    "sample_problem",
    "uniform_bw_state",
    "__version__",
]
