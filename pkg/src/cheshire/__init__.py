"""Classical post-selected "Cheshire cat" measurement model.

Local post-selected pointer averages of a purely classical, noisy two-detector
experiment mimic the Cheshire-cat signature, while every cross-moment of the
two readouts vanishes.
"""
__version__ = "0.1.0"

from .analytic import AnalyticReport, Method, QuadratureError, analytic_report
from .calibration import CalibrationResult, CalibrationTarget, InfeasibleTarget, Policy, fit
from .estimators import (NoiseCenterCalibrator, PostSelectedMoments, PostSelectionModel,
                         check_params, check_readouts)
from .model import DESK_PARAMS, PAPER_PARAMS, Event, ModelParams, ParameterError, validate
from .simulation import EstimateSet, SimConfig, run, signed_cross_moment

__all__ = [
    "AnalyticReport", "CalibrationResult", "CalibrationTarget", "DESK_PARAMS", "EstimateSet",
    "Event", "InfeasibleTarget", "Method", "ModelParams", "NoiseCenterCalibrator",
    "PAPER_PARAMS", "ParameterError", "Policy", "PostSelectedMoments", "PostSelectionModel",
    "QuadratureError", "SimConfig", "analytic_report", "check_params", "check_readouts", "fit",
    "run", "signed_cross_moment", "validate",
]
