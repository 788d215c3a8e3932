"""String-diagram calculus for monads with duals, plus exact-arithmetic models."""

from .errors import (
    BadVariableShape,
    BoundaryMismatch,
    CategoryMismatch,
    DimensionMismatch,
    DinatError,
    DslSyntaxError,
    DuplicateName,
    EKCycle,
    IllTyped,
    InvalidData,
    InverseOnNonIso,
    MissingAssignment,
    NoMatch,
    NonLinearMismatch,
    NotAModule,
    NotConvex,
    NotEKAdjacent,
    OpUndefined,
    StepFailure,
    StepMismatch,
    UnknownCategory,
    UnknownForm,
    UnknownGenerator,
    UnknownPreset,
    UnsupportedOrder,
    VarianceMismatch,
)
from .terms import App, Term, Var, cat_of, mk_app, render_term, typecheck
from .terms import typecheck as typecheck_term
from .signature import (
    Equation,
    FunctorGen,
    Signature,
    Theory,
    TransGen,
    load_theory,
    validate_signature,
)
from .diagram import (
    Diagram,
    Step,
    apply_step,
    build_diagram,
    diagrams_equal,
    ek_graph,
    exchange_normal_form,
    op_dual,
    render_step,
    target,
    vertical_compose,
    whisker,
)

__version__ = "0.1.0"
