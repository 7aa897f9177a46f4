"""Grid-evaluation kernels: compiled extension with pure-Python fallback.

The compiled backend is used when the extension built; set FMPLAN_PURE=1 to
force the pure backend (the benchmark and the equivalence tests exercise
both explicitly).
"""

from __future__ import annotations

import os

from . import pure
from .pack import GridProblem, grid_arrays, pack_instance, solution_from_arrays
from .pure import (
    FAM_CALENDAR,
    FAM_CAPACITY,
    FAM_CLUSTER_SERV,
    FAM_CLUSTER_SUST,
    FAM_FLIGHT_TIME,
    FAM_INITIAL,
    FAM_MIN_ASSIGN,
    FAM_MISSION_REQ,
    FAM_RFT,
    FAM_STATE,
    FAMILY_NAMES,
    TOL,
)

try:
    from . import _fastgrid
except ImportError:  # extension not built
    _fastgrid = None

HAVE_COMPILED = _fastgrid is not None
_FORCE_PURE = os.environ.get("FMPLAN_PURE", "") not in ("", "0")


def default_backend() -> str:
    return "compiled" if HAVE_COMPILED and not _FORCE_PURE else "pure"


def evaluate_grid(prob: GridProblem, mission_of, start, backend: str | None = None):
    """Evaluate one grid; returns (u, rft, violation records).

    ``backend`` is "pure", "compiled", or None for the default.
    """
    if backend is None:
        backend = default_backend()
    if backend == "pure":
        return pure.evaluate_grid(prob, mission_of, start)
    if backend == "compiled":
        if _fastgrid is None:
            raise RuntimeError("compiled kernel is not available")
        return _fastgrid.evaluate_grid(
            prob.horizon,
            prob.n_aircraft,
            prob.n_missions,
            prob.n_clusters,
            prob.check_duration,
            prob.calendar_min,
            prob.calendar_max,
            prob.capacity,
            prob.flight_max,
            prob.default_usage,
            prob.usage_ub,
            prob.known_in_maint,
            prob.m_start,
            prob.m_end,
            prob.m_hours,
            prob.m_req,
            prob.m_minasg,
            prob.nm,
            prob.rft0,
            prob.barred_until,
            prob.forced_lo,
            prob.forced_hi,
            prob.pre_mission,
            prob.pre_until,
            prob.member,
            prob.k_cap,
            prob.k_floor,
            prob.k_known,
            prob.tm_guard,
            mission_of,
            start,
        )
    raise ValueError(f"unknown kernel backend {backend!r}")


__all__ = [
    "GridProblem",
    "pack_instance",
    "grid_arrays",
    "solution_from_arrays",
    "evaluate_grid",
    "default_backend",
    "HAVE_COMPILED",
    "FAMILY_NAMES",
    "TOL",
    "FAM_INITIAL",
    "FAM_CAPACITY",
    "FAM_MISSION_REQ",
    "FAM_STATE",
    "FAM_MIN_ASSIGN",
    "FAM_CLUSTER_SERV",
    "FAM_CLUSTER_SUST",
    "FAM_FLIGHT_TIME",
    "FAM_RFT",
    "FAM_CALENDAR",
]
