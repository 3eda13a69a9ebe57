"""Exception types raised across the package."""


class LinkCommError(Exception):
    """Base class for all package errors."""


class GraphError(LinkCommError):
    """The input does not describe a valid graph."""


class EmptyInput(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class EdgeListSyntaxError(GraphError):
    pass


class SizeMismatch(LinkCommError):
    """Two link sets belong to graphs with different link counts."""


class EmptySet(LinkCommError):
    pass


class IllegalToggle(LinkCommError):
    """A move whose precondition does not hold for the current state."""


class TooLarge(LinkCommError):
    """Exhaustive enumeration refused because the graph has too many links."""


class EmptySeed(LinkCommError):
    pass


class DegenerateParents(LinkCommError):
    """One crossover parent contains the other."""


class AlreadyCrossed(LinkCommError):
    pass


class ConfigError(LinkCommError):
    pass


class NotAMinimum(UserWarning):
    """Range requested for a link set that is not a local minimum."""
