"""Valuations on piecewise linear-quadratic (PLQ) convex functions of one variable.

Exact PLQ arithmetic and lattice operations, the closed-form valuations
``c0 + c1 V1(dom u) + integral of zeta(u'')``, their recovery from black-box
probes, tau-convergence diagnostics and the approximation constructions.
"""

from .constructions import (
    StitchParams,
    chord_approximation,
    exact_sup_gap,
    lipschitz_bound_constant,
    positive_case_approximant,
    stitch,
    stitch_value_identity,
    support_triangle,
    vitali_decompose,
    zero_case_approximant,
)
from .convergence import (
    FunctionSequence,
    hausdorff_distance,
    semicontinuity_probe,
    sequence_report,
    tau_convergence_check,
)
from .errors import PLQValError
from .functionals import (
    BUILTIN_SPECS,
    ValuationClassifier,
    ValuationSpec,
    classify,
    extract_c0,
    extract_c1,
    extract_zeta,
    closed_form_valuation,
    v1_of_domain,
    zeta_integral,
)
from .plq import (
    Interval,
    PLQFunction,
    QuadraticPiece,
    affine,
    from_pieces,
    indicator,
    point_indicator,
    pointwise_max,
    pointwise_min,
    plq_sum,
    quadratic,
    valuation_quadruple,
)
from .zeta import BUILTIN_ZETAS, ZetaSpec, parse_zeta

__version__ = "0.1.0"
