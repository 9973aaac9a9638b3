"""Exception types raised across the package."""


class SPConsError(Exception):
    """Base class for all domain errors."""


class NonPositiveWeight(SPConsError, ValueError):
    pass


class SelfLoop(SPConsError, ValueError):
    pass


class Disconnected(SPConsError, ValueError):
    pass


class EmptyInputSet(SPConsError, ValueError):
    pass


class NotSeriesParallel(SPConsError):
    """Series-parallel reduction stalled before reaching a single terminal edge.

    ``remaining_nodes`` and ``remaining_edges`` describe the stuck reduced graph.
    """

    def __init__(self, message, remaining_nodes=0, remaining_edges=0):
        super().__init__(message)
        self.remaining_nodes = remaining_nodes
        self.remaining_edges = remaining_edges


class NonPositiveInput(SPConsError, ValueError):
    pass


class NonPositiveResistance(SPConsError, ValueError):
    pass


class ParallelVoltageMismatch(SPConsError, ArithmeticError):
    """Children of a parallel join report different voltage drops."""


class NotAllInputTTSP(SPConsError):
    pass


class MissingTree(SPConsError, KeyError):
    pass


class InfeasibleWeights(SPConsError, ValueError):
    pass


class SingularA(SPConsError, ArithmeticError):
    pass


class SingularLyapunov(SPConsError, ArithmeticError):
    pass


class ParseError(SPConsError, ValueError):
    pass


class MaxItersExceeded(RuntimeWarning):
    """Optimizer hit its iteration cap; the best iterate is still returned."""
