#!/usr/bin/env python
"""
dyadicbloom - numerical verification of dyadic multi-parameter harmonic analysis:
Haar transforms, Muckenhoupt weights, product BMO, paraproducts and Bloom-type
commutator estimates on finite dyadic grids.
"""
import os
from pathlib import Path
import traceback


def get_version():
    """
    Get the version of the dyadicbloom package.
    Version is taken from the __version__.py file if it exists.
    The content of __version__.py should be:
    version = "0.1.0"
    """
    try:
        version_file = Path(__file__).parent / "__version__.py"
        if version_file.is_file():
            with open(version_file, "r") as f:
                for line in f:
                    if line.strip().startswith("version"):
                        parts = line.split("=")
                        if len(parts) == 2:
                            return parts[1].strip().strip('"').strip("'")
    except Exception as e:
        if os.getenv('TRACEBACK') and os.getenv('TRACEBACK') in ['1', 'true', 'True']:
            print(traceback.format_exc())
        else:
            print(f"ERROR: {e}")

    return "0.0.0"


__version__ = get_version()

from .exceptions import (
    DyadicError,
    GridError,
    SpecMismatchError,
    ScaleError,
    ExponentError,
    RecipeError,
    FamilyError,
    SymmetryError,
    NormalizationError,
    DegenerateInstanceError,
    ConfigError,
    FixtureError,
    SuiteFailure,
)
from .logger import setup_logging, performance_monitor, performance_stats, print_exception
from .config import Settings, ExperimentConfig, get_settings, load_config, split_seed
from .lattice import (
    GridSpec,
    DyadicInterval,
    DyadicRectangle,
    GridFunction,
    OmegaSet,
    OmegaFamily,
    AllRectangles,
    RandomUnions,
    LevelSets,
    FullSpace,
    enumerate_rectangles,
    omega_family,
    rectangle_averages,
    tensor_product,
)
from .haar import (
    HaarIndex,
    HaarCoefficients,
    haar_function,
    haar_coefficient,
    partial_coefficient,
    synthesize,
    forward_transform,
    inverse_transform,
    martingale_diff,
    martingale_avg,
    martingale_block,
    cancellative_projection,
)
from .weights import (
    Weight,
    BloomWeight,
    Constant,
    PowerLike,
    RandomBoundedRatio,
    Tensor,
    NonTensorMix,
    ap_constant,
    ainf_constant,
    iterated_ap,
    dual_weight,
    power_product,
    is_tensor,
    generate_weight,
    parse_recipe,
    bloom_nu,
)
from .maximal_square import (
    NormParams,
    lp_norm,
    maximal,
    weighted_maximal,
    square_function,
    fs_vector_maximal,
    vector_lp_norm,
    lower_square_ratio,
)
from .bmo import (
    CoefSequence,
    BmoReport,
    sa,
    sa_omega,
    bmo_prod,
    bmo_prod_w,
    bmo_prod_weighted,
    lift_aw,
    jn_ratio,
    h1_bmo_pairing,
    little_bmo_bloom,
    dual_bmo_lower,
    HaarSampler,
)
from .paraproducts import (
    Slot,
    FullParaproductSymmetry,
    PartialParaproductCoefs,
    all_symmetries,
    linear_paraproduct,
    full_paraproduct,
    full_paraproduct_bound_report,
    case_one_majorant,
    dual_sum,
    partial_paraproduct,
    generate_partial_coefs,
    aij,
    aij2,
    coarse,
    coarse2,
    operator_u,
)
from .commutators import (
    CommutatorDecomposition,
    commutator,
    decompose,
    average_gap_telescoped,
    e1_dual_bound,
    e2_dual_form,
    vector_pairing_sides,
    bloom_ratio,
)
from .harness import SUITES, run_suite, verify, run_experiment, calibrate

__all__ = [
    "__version__",
    "DyadicError",
    "GridError",
    "SpecMismatchError",
    "ScaleError",
    "ExponentError",
    "RecipeError",
    "FamilyError",
    "SymmetryError",
    "NormalizationError",
    "DegenerateInstanceError",
    "ConfigError",
    "FixtureError",
    "SuiteFailure",
    "setup_logging",
    "performance_monitor",
    "performance_stats",
    "print_exception",
    "Settings",
    "ExperimentConfig",
    "get_settings",
    "load_config",
    "split_seed",
    "GridSpec",
    "DyadicInterval",
    "DyadicRectangle",
    "GridFunction",
    "OmegaSet",
    "OmegaFamily",
    "AllRectangles",
    "RandomUnions",
    "LevelSets",
    "FullSpace",
    "enumerate_rectangles",
    "omega_family",
    "rectangle_averages",
    "tensor_product",
    "HaarIndex",
    "HaarCoefficients",
    "haar_function",
    "haar_coefficient",
    "partial_coefficient",
    "synthesize",
    "forward_transform",
    "inverse_transform",
    "martingale_diff",
    "martingale_avg",
    "martingale_block",
    "cancellative_projection",
    "Weight",
    "BloomWeight",
    "Constant",
    "PowerLike",
    "RandomBoundedRatio",
    "Tensor",
    "NonTensorMix",
    "ap_constant",
    "ainf_constant",
    "iterated_ap",
    "dual_weight",
    "power_product",
    "is_tensor",
    "generate_weight",
    "parse_recipe",
    "bloom_nu",
    "NormParams",
    "lp_norm",
    "maximal",
    "weighted_maximal",
    "square_function",
    "fs_vector_maximal",
    "vector_lp_norm",
    "lower_square_ratio",
    "CoefSequence",
    "BmoReport",
    "sa",
    "sa_omega",
    "bmo_prod",
    "bmo_prod_w",
    "bmo_prod_weighted",
    "lift_aw",
    "jn_ratio",
    "h1_bmo_pairing",
    "little_bmo_bloom",
    "dual_bmo_lower",
    "HaarSampler",
    "Slot",
    "FullParaproductSymmetry",
    "PartialParaproductCoefs",
    "all_symmetries",
    "linear_paraproduct",
    "full_paraproduct",
    "full_paraproduct_bound_report",
    "case_one_majorant",
    "dual_sum",
    "partial_paraproduct",
    "generate_partial_coefs",
    "aij",
    "aij2",
    "coarse",
    "coarse2",
    "operator_u",
    "CommutatorDecomposition",
    "commutator",
    "decompose",
    "average_gap_telescoped",
    "e1_dual_bound",
    "e2_dual_form",
    "vector_pairing_sides",
    "bloom_ratio",
    "SUITES",
    "run_suite",
    "verify",
    "run_experiment",
    "calibrate",
]
