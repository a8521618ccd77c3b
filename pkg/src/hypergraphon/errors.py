"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
process status without a lookup table.
"""


class HypergraphonError(Exception):
    exit_code = 1


class ValidationError(HypergraphonError, ValueError):
    exit_code = 4


# core objects
class ArityMismatch(ValidationError):
    pass


class VertexOutOfRange(ValidationError):
    pass


class RepeatedVertexInTuple(ValidationError):
    pass


class BadRelationIndex(ValidationError):
    pass


class TooLargeForExactIso(ValidationError):
    pass


# step functions
class SimplexViolation(ValidationError):
    pass


class SymmetryViolation(ValidationError):
    pass


class RangeViolation(ValidationError):
    pass


class BadBlockIndex(ValidationError):
    pass


class ExactBoundExceeded(ValidationError):
    pass


class PartitionsNotPermutable(ValidationError):
    pass


class EmptyGraph(ValidationError):
    pass


# densities and objectives
class TooManyTerms(ValidationError):
    pass


class IndexArityMismatch(ValidationError):
    pass


class DomainViolation(ValidationError):
    pass


# logic
class FormulaError(ValidationError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class FormulaSyntaxError(FormulaError):
    pass


class UnknownRelation(FormulaError):
    pass


class ArityError(FormulaError):
    pass


class UnquantifiedVariable(FormulaError):
    pass


class RepeatedVariableInAtom(FormulaError):
    pass


class EmptySolutionSet(ValidationError):
    pass


# solver outcomes
class Infeasible(HypergraphonError):
    exit_code = 2


class InfeasibleUpToMax(Infeasible):
    pass


class NonConvergent(HypergraphonError):
    """Raised when no restart meets the stationarity tolerance.

    ``report`` holds the partial :class:`~hypergraphon.solver.SolveReport`
    with every constraint-feasible candidate, flagged as unconverged.
    """

    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
