"""Verification harnesses, scaling fits, reports and champagne domains."""

from .champagne import ChampagneSpec, PlacementError, make_champagne
from .pipeline import (
    PipelineResult,
    gradient_integral,
    gradient_integral_refinement,
    pigeonhole_levels,
    run_pipeline,
)
from .report import Check, Row, ScalingFit, VerificationReport, fit_scaling, geometric_grid
from .statements import (
    Thm2Settings,
    verify_carbery,
    verify_champagne,
    verify_coarea,
    verify_fk,
    verify_lemma5,
    verify_lemma6,
    verify_lemma7,
    verify_prop2,
    verify_prop2_prop4,
    verify_prop4,
    verify_thm2,
    verify_thm3,
    verify_vdcorput,
)

__all__ = [
    "ChampagneSpec",
    "Check",
    "PipelineResult",
    "PlacementError",
    "Row",
    "ScalingFit",
    "Thm2Settings",
    "VerificationReport",
    "fit_scaling",
    "geometric_grid",
    "gradient_integral",
    "gradient_integral_refinement",
    "make_champagne",
    "pigeonhole_levels",
    "run_pipeline",
    "verify_carbery",
    "verify_champagne",
    "verify_coarea",
    "verify_fk",
    "verify_lemma5",
    "verify_lemma6",
    "verify_lemma7",
    "verify_prop2",
    "verify_prop2_prop4",
    "verify_prop4",
    "verify_thm2",
    "verify_thm3",
    "verify_vdcorput",
]
