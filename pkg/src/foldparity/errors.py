"""Exception hierarchy shared across the toolkit."""


class FoldParityError(Exception):
    """Base class for all toolkit errors."""


class EvaluationError(FoldParityError):
    """A family evaluator produced a non-finite value."""


class UnknownFamily(FoldParityError):
    pass


class FamilyFileError(FoldParityError):
    """Family-file parse error; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularMatrix(FoldParityError):
    pass


class NoConvergence(FoldParityError):
    pass


class AmbiguousKernel(FoldParityError):
    """Two eigenvalues passed the null gate (BT / fold-Hopf proximity)."""


class MaxIter(FoldParityError):
    pass


class BranchLost(FoldParityError):
    pass


class BoundaryExit(FoldParityError):
    """Tracked state left the admissible state ball."""


class StepCollapse(FoldParityError):
    pass


class SeedDegenerate(FoldParityError):
    pass


class FoldOnPath(FoldParityError):
    """A regular lift hit a fold; the lift does not continue past it."""


class FrameUnavailable(FoldParityError):
    pass


class DegenerateNormalization(FoldParityError):
    """<p, q> below the BT gate; the <p,q>=1 scaling is unusable."""


class DegenerateCusp(FoldParityError):
    """Cubic coefficient below gate; higher-order point, reported not classified."""


class AtCusp(FoldParityError):
    """Fold orientation requested at a point with vanishing quadratic coefficient."""


class NotPseudoHyperbolic(FoldParityError):
    pass


class RefinementFailed(FoldParityError):
    def __init__(self, message, bracket=None):
        self.bracket = bracket
        super().__init__(message)


class ClassificationConflict(FoldParityError):
    """Sheet-sampled cusp kind disagrees with the sign of the cubic coefficient."""


class SZViolation(FoldParityError):
    def __init__(self, reason, detail=""):
        self.reason = reason
        self.detail = detail
        msg = reason if not detail else f"{reason}: {detail}"
        super().__init__(msg)


class TransportBroken(FoldParityError):
    pass


class InconclusiveMembership(FoldParityError):
    def __init__(self, message, gap=None):
        self.gap = gap
        super().__init__(message)


class CrossCheckFailure(FoldParityError):
    pass


class NotParameterLinear(FoldParityError):
    pass


class SchemaMismatch(FoldParityError):
    pass


class ReportParseError(FoldParityError):
    pass
