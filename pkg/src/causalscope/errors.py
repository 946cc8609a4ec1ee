"""Exception types shared across the package."""


class CausalScopeError(Exception):
    """Base class for all package errors."""


class GraphInvariantError(CausalScopeError):
    """A structural invariant of a graph is violated."""


class CycleDetected(GraphInvariantError):
    pass


class SelfLoop(GraphInvariantError):
    pass


class DuplicateEdge(GraphInvariantError):
    pass


class VertexOutOfRange(CausalScopeError):
    pass


class SetsOverlap(CausalScopeError):
    pass


class TooLargeToEnumerate(CausalScopeError):
    """An exact computation would exceed the enumeration guard."""


class VertexNotInSupport(CausalScopeError):
    pass


class SupportMismatch(CausalScopeError):
    pass


class PreconditionViolated(CausalScopeError):
    pass


class BudgetMismatch(CausalScopeError):
    pass


class InsufficientSamples(CausalScopeError):
    pass


class DegenerateParams(CausalScopeError):
    pass


class IterationBudgetExceeded(CausalScopeError):
    """A resampling loop ran past its round budget."""


class NotCovering(CausalScopeError):
    pass


class BadDimensions(CausalScopeError):
    pass
