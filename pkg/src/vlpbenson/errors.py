"""Exception hierarchy."""


class VlpError(Exception):
    """Base class for all errors raised by the package."""


class EmptySet(VlpError):
    """A polyhedron expected to be nonempty is empty."""


class ContainsLine(VlpError):
    """A polyhedron has a nontrivial lineality space."""


class NumericalFailure(VlpError):
    """An iteration cap was hit or the arithmetic became unreliable."""


class PrimalInfeasible(VlpError):
    """The feasible set of the vector problem is empty."""


class DualInfeasible(VlpError):
    """The feasible set of the geometric dual problem is empty."""


class UpperImageContainsLines(VlpError):
    """The homogeneous upper image has no vertex."""


class NoVertex(UpperImageContainsLines):
    """The current outer approximation has no vertex."""


class ParseError(VlpError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidCone(VlpError):
    """Ordering cone is not pointed and solid, or Y and Z disagree."""


class InvalidC(VlpError):
    """The interior vector c is not interior or has c_q != 1."""


class InvalidAlpha(VlpError):
    pass


class NoInteriorC(VlpError):
    pass


class DimensionError(VlpError):
    pass


class IncidenceViolation(VlpError):
    def __init__(self, report):
        self.report = report
        super().__init__(report.to_text())
