"""Fractal interpolation IFSs, their attractors and fractal continuations."""

from .analysis import (
    address_of,
    box_dimension,
    compose_ifs,
    derivative_series,
    dimension_solve,
    double_points,
    lipschitz_bound,
    uniqueness_probe,
)
from .attractor import (
    PointCloud,
    PolylineApproximant,
    attractor_general,
    chaos_game,
    evaluate,
    evaluate_many,
    hausdorff_distance,
    hutchinson_cloud,
    hutchinson_step,
    w_operator,
)
from .continuation import (
    Address,
    agreement_check,
    conjugated_ifs,
    continuation_cloud,
    continuation_probability_bound,
    continue_eval,
    domain_interval,
    domain_limit_kind,
    ensemble,
    format_address,
    parse_address,
)
from .estimators import FractalInterpolator
from .examples import get_example, list_examples, oracle_eval
from .ifs import (
    GeneralAffineIFS2D,
    InterpolationIFS,
    Interval,
    apply_branch,
    ifs_from_analytic,
    ifs_from_data,
    invert_branch,
    validate,
)

__version__ = "0.1.0"
