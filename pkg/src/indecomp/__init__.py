"""Exact classification of additively indecomposable binary quadratic forms
over rings of integers of real quadratic fields."""

from .field import (
    FieldContext,
    QNum,
    divides,
    format_qnum,
    make_context,
    parse_qnum,
)
from .forms import (
    CLASSICAL,
    NONCLASSICAL,
    BinaryForm,
    DecompositionWitness,
    find_decomposition,
    form_from_literal,
    inde_from_inde_check,
    is_additively_indecomposable,
    is_tpd,
    is_tpsd,
    quick_decomposable,
    sum_of_squares,
)
from .indec import (
    IndecSet,
    PeriodicCF,
    continued_fraction,
    decompose_integer,
    dominance_constant,
    fundamental_unit,
    indecomposables,
)
from .lattice import box_between, min_norm, tp_reps_up_to_norm, vectors_by_trace
from .classify import (
    ClassificationReport,
    ClassifyOptions,
    are_equivalent,
    beta_candidates,
    census,
    classify,
    det_candidates,
    family_m2p1,
    fixed_det_demo,
    min_candidates,
)
from .universal import (
    BoundReport,
    g_invariant,
    icaza_gamma_bound,
    lower_bound_43,
    lower_bound_44,
    lower_bound_u_half,
    r_set_count,
    u_set,
    unit_sphere_volume,
    upper_bound_41,
    upper_bound_42,
    upper_bound_refined,
)

__version__ = "0.1.0"
