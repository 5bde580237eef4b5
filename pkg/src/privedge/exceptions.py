"""Exception types raised by privedge."""


class PrivEdgeError(ValueError):
    """Base class for all library errors."""


class ZeroInverse(PrivEdgeError, ZeroDivisionError):
    pass


class DimensionMismatch(PrivEdgeError):
    pass


class InvalidParams(PrivEdgeError):
    pass


class NotEnoughShares(PrivEdgeError):
    pass


class InconsistentShares(PrivEdgeError):
    pass


class SubsetTooLarge(PrivEdgeError):
    pass


class InfeasibleFill(PrivEdgeError):
    pass


class InfeasibleT(PrivEdgeError):
    """The stopping rule for the computation phase is never met."""


class Deadlock(PrivEdgeError):
    """All edge nodes are idle but the downloaded IRs are not decodable."""


class EmptySpace(PrivEdgeError):
    """No feasible scheme exists in a search space."""


class InfeasibleConfig(PrivEdgeError):
    pass
