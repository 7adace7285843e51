"""Random walks, branching random walks and boundary dimension on groups."""

from ._core import (
    CapExceeded,
    DivergentSeries,
    Group,
    ValidationError,
    __version__,
    config_hash,
    green,
    omega,
    render_config,
    run_experiment,
    spectral_radius,
)

__all__ = [
    "CapExceeded",
    "DivergentSeries",
    "Group",
    "ValidationError",
    "__version__",
    "config_hash",
    "green",
    "omega",
    "render_config",
    "run_experiment",
    "spectral_radius",
]
