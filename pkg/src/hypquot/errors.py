class HypquotError(Exception):
    """Base class for all library errors."""


class GraphError(HypquotError, ValueError):
    pass


class SelfLoopError(GraphError):
    def __init__(self, vertex):
        super().__init__(f"self-loop at vertex {vertex}")
        self.vertex = vertex


class DuplicateEdgeError(GraphError):
    def __init__(self, edge):
        super().__init__(f"duplicate edge {edge}")
        self.edge = edge


class DisconnectedGraphError(GraphError):
    def __init__(self, vertex):
        super().__init__(f"graph is disconnected: vertex {vertex} unreachable from 0")
        self.vertex = vertex


class InvalidVertexError(GraphError, IndexError):
    def __init__(self, vertex, n):
        super().__init__(f"invalid vertex {vertex!r} (graph has {n} vertices)")
        self.vertex = vertex


class ResourceError(HypquotError):
    """A size cap was exceeded."""


class UnsupportedOperationError(HypquotError):
    pass


class DomainError(HypquotError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class EpsilonSearchError(HypquotError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BoundaryError(HypquotError, ValueError):
    """A chain does not have the boundary an operation requires."""


class PathError(HypquotError, ValueError):
    pass
