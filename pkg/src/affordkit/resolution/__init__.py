"""Plan construction, mixed-initiative resolution search, and previews."""

from .plan import (ActionPlan, Instruction, PlanCompiler, PlanError, PlanStep,
                   simulate_plan, simulate_step, step_effects)
from .preview import PREVIEW_FRAME_INTERVAL, Keyframe, preview
from .search import (K_AUTO, R_ALT, Alternative, ResolutionOffer, Resolver)

__all__ = [
    "ActionPlan", "Alternative", "Instruction", "K_AUTO", "Keyframe",
    "PREVIEW_FRAME_INTERVAL", "PlanCompiler", "PlanError", "PlanStep",
    "R_ALT", "ResolutionOffer", "Resolver", "preview", "simulate_plan",
    "simulate_step", "step_effects",
]
