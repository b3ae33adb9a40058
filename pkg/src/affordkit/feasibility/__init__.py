"""Feasibility checking, explanations, and the action menu."""

from . import conditions
from .catalog import (TAG_MAX_LEN, Explanation, ExplanationCatalog,
                      default_catalog, explain)
from .conditions import VARIANT_FIELDS, FailureCondition
from .engine import (AreaTarget, FeasibilityEngine, FeasibilityVerdict,
                     LevelTarget, MenuEntry, PlacementTarget, SpatialParam,
                     action_menu, evaluate, grasp_point, param_from_dict,
                     param_to_dict, pick_exemptions, shared_engine,
                     signifier_hit)

__all__ = [
    "AreaTarget", "Explanation", "ExplanationCatalog", "FailureCondition",
    "FeasibilityEngine", "FeasibilityVerdict", "LevelTarget", "MenuEntry",
    "PlacementTarget", "SpatialParam", "TAG_MAX_LEN", "VARIANT_FIELDS",
    "action_menu", "conditions", "default_catalog", "evaluate", "explain",
    "grasp_point", "param_from_dict", "param_to_dict", "pick_exemptions",
    "shared_engine", "signifier_hit",
]
