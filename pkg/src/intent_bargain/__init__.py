"""Bargaining-based resolution of direct-target conflicts between network intents."""
from .bargain import (METHODS, ArbitrationReport, BargainingProblem, Player, Solution, arbitrate,
                      feasible_region, ideal_point, individual_optimum, jain_index, solve_ksbs,
                      solve_nbs, solve_sebs, solve_wnbs)
from .curves import UtilityCurve, eval_curve, read_curves_csv, write_curves_csv

__all__ = [
    "METHODS", "ArbitrationReport", "BargainingProblem", "Player", "Solution", "UtilityCurve",
    "arbitrate", "eval_curve", "feasible_region", "ideal_point", "individual_optimum",
    "jain_index", "read_curves_csv", "solve_ksbs", "solve_nbs", "solve_sebs", "solve_wnbs",
    "write_curves_csv",
]
