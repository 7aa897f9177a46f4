"""Long-horizon fleet flight and maintenance planning toolkit.

Generate benchmark instances, build the exact mixed-integer model and emit
it as LP files, validate and score candidate solutions, search for feasible
schedules with a release/repair annealer, and map fixed-interval scheduling
problems onto planning feasibility.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    Aircraft,
    Cluster,
    Instance,
    InstanceError,
    Mission,
    Params,
    Solution,
    SolutionError,
)
from .generate import GenConfig, ScenarioGrid, generate_instance  # noqa: F401
from .validate import (  # noqa: F401
    OBJ_CHECKS,
    OBJ_CHECKS_RFT,
    ViolationReport,
    brute_force_solve,
    check_solution,
    derive_usage,
    objective,
)
from .mip import build_model, fix_initial_conditions, model_stats  # noqa: F401
from .lpfile import emit_lp, parse_lp  # noqa: F401
from .anneal import SaParams, sa_solve  # noqa: F401
from .reduction import FisInstance, FisTask, fis_to_fmp  # noqa: F401
