"""Simpson reversal in 2x2xK contingency tables, in exact arithmetic."""

from .analysis import (
    CaseLabel,
    Dissection,
    Reversal,
    ReversalReport,
    check_necessary_condition,
    check_sufficient_avoidance,
    classify_case,
    detect_reversal,
    dissection,
    independence_gap,
    pooled_dependence_bound,
    stratum_weights,
)
from .errors import *  # noqa: F401,F403
from .figure import FigureModel, build_figure, render_svg
from .ingest import ColumnMapping, ScanResult, aggregate, disaggregate, read_records, scan_covariates
from .mixture import Mechanism, MixtureSpec, mixture_from_table, mixture_predict
from .synthesis import SynthesisResult, SynthesisSpec, synthesize_reverser, verify
from .tables import (
    AssociationMeasure,
    CellCounts,
    Sign,
    StratifiedTable,
    association,
    cond_prob,
    pool,
    relabel_exposure,
    relabel_outcome,
    to_joint,
)

__version__ = "0.1.0"
