"""Exception hierarchy for the whole engine.

Everything raised on purpose derives from DinatError, so callers can catch
one type at the CLI boundary.  Report-valued operations (validate_signature,
check_proof, the numeric checks) do not raise these; they collect findings.
"""


class DinatError(Exception):
    """Base class for all engine errors."""


class DuplicateName(DinatError):
    pass


class UnknownCategory(DinatError):
    pass


class UnknownGenerator(DinatError):
    pass


class UnknownPreset(DinatError):
    pass


class IllTyped(DinatError):
    """A term violates the typing or canonical-form rules."""


class ArityMismatch(IllTyped):
    pass


class CategoryMismatch(IllTyped):
    pass


class BadVariableShape(DinatError):
    """A transformation variable occurs with a pattern outside
    natural / consume / produce."""


class VarianceMismatch(DinatError):
    """A consume or produce pair is not one covariant plus one
    contravariant occurrence, or a natural pair changes variance."""


class NoMatch(DinatError):
    """A step's instantiated pattern is not what sits at its position."""


class NonLinearMismatch(NoMatch):
    """The two occurrences of a consume-kind variable differ."""


class InverseOnNonIso(DinatError):
    pass


class MissingAssignment(DinatError):
    """A substitution or object assignment lacks a required entry."""


class StepFailure(DinatError):
    """A step inside a diagram failed; carries the step index and cause."""

    def __init__(self, index, cause):
        super().__init__(f"step {index}: {cause}")
        self.index = index
        self.cause = cause


class EKCycle(DinatError):
    """A composition closed a loop in the Eilenberg-Kelly graph."""

    def __init__(self, witness):
        super().__init__(f"closed loop: {witness}")
        self.witness = witness


class BoundaryMismatch(DinatError):
    pass


class OpUndefined(DinatError):
    """Kept for API compatibility.  Steps are parity-relative here, so the
    op-mate of a step is the step itself and this is never raised by the
    shipped operations."""


class NotConvex(DinatError):
    """The selected steps are not a dependency-convex block."""


class StepMismatch(DinatError):
    """A selected block does not replay the pattern side of an equation."""


class NotEKAdjacent(DinatError):
    """dinat_slide asked to slide a step that is not wired to the paired
    legs of the dinatural step."""


class DimensionMismatch(DinatError):
    """Internal guard: a composite was fed matrices of incompatible shape."""


class InvalidData(DinatError):
    """Structure constants fail validation or are dimensionally impossible."""


class NotAModule(DinatError):
    """A probe object does not satisfy the module laws."""


class UnsupportedOrder(DinatError):
    pass


class DslSyntaxError(DinatError):
    """Parse error with a (line, column) span."""

    def __init__(self, message, span):
        line, col = span
        super().__init__(f"{message} at {line}:{col}")
        self.span = span


class UnknownForm(DinatError):
    pass
