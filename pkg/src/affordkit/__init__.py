"""affordkit: object-affordance feasibility engine for a simulated mobile
manipulator, with explanations, mixed-initiative resolutions, plan execution,
and an interactive gateway."""

__version__ = "0.1.0"

from . import errors, executor, feasibility, gateway, geometry, resolution, \
    spatial, world

__all__ = ["errors", "executor", "feasibility", "gateway", "geometry",
           "resolution", "spatial", "world", "__version__"]
