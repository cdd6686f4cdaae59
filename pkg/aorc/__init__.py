"""AORC - FDR-controlling stepwise procedures based on the asymptotically optimal rejection curve."""

__version__ = "0.1.0"

from .asymptotics import AsymptoticModel, limiting_fdr_of_procedure, solve_r_star, t_zeta  # noqa: E402
from .calibrate import CalibrationResult, calibrate_beta, max_du_fdr  # noqa: E402
from .cli import app  # noqa: E402
from .config import Settings, build_curve  # noqa: E402
from .curves import CriticalValues, CurveVariant, RejectionCurveSpec, critical_values, eval_rho  # noqa: E402
from .exact_du import DuConfig, exact_du_fdr_su, su_rejection_pmf, worst_case_scan  # noqa: E402
from .montecarlo import DataModel, McEstimate, compare_power, estimate  # noqa: E402
from .stepwise import Decision, PValueSample, ProcedureKind, decide  # noqa: E402

__all__ = [
    "AsymptoticModel",
    "CalibrationResult",
    "CriticalValues",
    "CurveVariant",
    "DataModel",
    "Decision",
    "DuConfig",
    "McEstimate",
    "PValueSample",
    "ProcedureKind",
    "RejectionCurveSpec",
    "Settings",
    "app",
    "build_curve",
    "calibrate_beta",
    "compare_power",
    "critical_values",
    "decide",
    "estimate",
    "eval_rho",
    "exact_du_fdr_su",
    "limiting_fdr_of_procedure",
    "max_du_fdr",
    "solve_r_star",
    "su_rejection_pmf",
    "t_zeta",
    "worst_case_scan",
]
