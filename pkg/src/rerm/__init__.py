"""Robust empirical risk minimization over convex per-datapoint
uncertainty sets, solved exactly as a single conic program.

The public surface: set primitives and algebra (`sets`), conic program
IR and statuses (`program`), the embedded operator-splitting solver
(`solver`), support-function dualization (`support`), loss epigraphs
(`losses`), problem assembly (`builder`), brute-force verification
oracles (`oracle`), and the experiment harness (`experiment`).
"""

from .builder import (
    RermError,
    RermProblem,
    RermSolution,
    build,
    build_analytical_ball,
    solve_rerm,
    worst_case_loss,
)
from .cones import Cone, ConeKind, check_membership, dual_cone, project
from .data import CsvError, load_csv
from .experiment import ExperimentConfig, run_experiment
from .kernels import HAVE_COMPILED, ConeProjector
from .losses import LossKind, LossSpec, MonotoneClass, classification_transform
from .oracle import (
    GridSpec,
    analytical_ball_worst_case,
    grid_sup_linear,
    polytope_vertices,
)
from .program import (
    Certificate,
    ConicProgram,
    ProgramBuilder,
    Residuals,
    Solution,
    SolveStatus,
)
from .sets import (
    AffineEq,
    AffineIneq,
    Box,
    ConicRep,
    FixCoords,
    NormBall,
    SetExpr,
    SumSquaresBall,
    canonicalize,
    intersect,
    set_from_json,
    set_to_json,
    validate_compactness_hint,
)
from .solver import Scaling, SolverSettings, refine, solve
from .support import (
    EmptySetError,
    UnboundedSetError,
    emit_support_constraint,
    support_value,
)

__version__ = "0.1.0"
