"""steptile: exact Fourier/LP analysis of step functions, tilings and pd-tilings of Z_M."""

from .zm_arith import Modulus, ClassSet, build_modulus, class_of
from .step_fn import (
    DenseFunction,
    StepFunction,
    average_to_step,
    autocorrelation_step,
    convolve,
    fold,
    indicator,
    step_from_vector,
    total_weight,
)
from .fourier import eigen_check, ft_class_matrix, ft_step, ft_support
from .cyclotomic import (
    CycloReport,
    cuboid_eval,
    cyclotomic_poly,
    divides,
    remainder_oracle,
    support_T2,
    t1t2_report,
)
from .ratlp import LpProblem, LpResult, ResourceLimitError, problem, solve
from .delsarte import (
    ScreenReport,
    clique_number,
    delsarte_bound,
    delta_m,
    delta_screen,
    k_of,
    screen,
    standard_complement,
)
from .tiling import (
    PdTilingReport,
    TileSet,
    construct_pd_pair,
    counterexample_pair,
    div_star,
    is_tiling,
    pd_tile_feasible,
    sands_check,
    standard_prime_power_tiling,
    tile_set,
    verify_functional_pd_tiling,
)
from .sweep import (
    CheckpointError,
    SweepConfig,
    SweepRow,
    enumerate_candidates,
    merge_shards,
    run_sweep,
    sweep_config,
    sweep_rows,
)

__all__ = [
    "Modulus", "ClassSet", "build_modulus", "class_of",
    "DenseFunction", "StepFunction", "average_to_step", "autocorrelation_step",
    "convolve", "fold", "indicator", "step_from_vector", "total_weight",
    "eigen_check", "ft_class_matrix", "ft_step", "ft_support",
    "CycloReport", "cuboid_eval", "cyclotomic_poly", "divides",
    "remainder_oracle", "support_T2", "t1t2_report",
    "LpProblem", "LpResult", "ResourceLimitError", "problem", "solve",
    "ScreenReport", "clique_number", "delsarte_bound", "delta_m",
    "delta_screen", "k_of", "screen", "standard_complement",
    "PdTilingReport", "TileSet", "construct_pd_pair", "counterexample_pair",
    "div_star", "is_tiling", "pd_tile_feasible", "sands_check",
    "standard_prime_power_tiling", "tile_set", "verify_functional_pd_tiling",
    "CheckpointError", "SweepConfig", "SweepRow", "enumerate_candidates",
    "merge_shards", "run_sweep", "sweep_config", "sweep_rows",
]

__version__ = "0.1.0"
