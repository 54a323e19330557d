"""Exception hierarchy shared by all fejerlab modules."""


class FejerlabError(Exception):
    """Base class for all errors raised by fejerlab."""


class DimensionMismatch(FejerlabError):
    """Operands live in different ambient dimensions."""


class UnsupportedSet(FejerlabError):
    """The requested operation has no closed form for this set variant."""


class NotViolating(FejerlabError):
    """A separating hyperplane was requested at a point that is not cut off."""


class ZeroSubgradient(FejerlabError):
    """The subgradient vanishes, so no separating hyperplane exists."""


class NegativeEpsilon(FejerlabError):
    """An inner-approximation shift must be nonnegative."""


class EmptySample(FejerlabError):
    """A sampled check was invoked with no sample points."""


class EmptyProblem(FejerlabError):
    """A solver was invoked with no constraints."""


class InvalidN(FejerlabError):
    """The supplied tail index does not make the trace monotone from there on."""


class LengthMismatch(FejerlabError):
    """A per-step scalar sequence does not cover every step of the trace."""


class DegenerateClusterPair(FejerlabError):
    """The two cluster points coincide, so the geometric check is vacuous."""
