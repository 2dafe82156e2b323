"""Exception hierarchy shared by all scgmine modules."""


class ScgMineError(Exception):
    """Base class for every error raised by this package."""


class GraphError(ScgMineError, ValueError):
    """A graph violates its structural invariants."""


class BudgetExhausted(ScgMineError):
    """Subgraph search ran out of node expansions.

    ``partial_count`` is a lower bound on the true count.
    """

    def __init__(self, partial_count, budget):
        super().__init__(f"embedding search exceeded {budget} expansions (partial count {partial_count})")
        self.partial_count = partial_count
        self.budget = budget


class MalformedLabelError(ScgMineError, ValueError):
    """A change-graph label does not follow the Add_/Remove_/Preserve_ convention."""


class TypeGraphMismatch(ScgMineError, ValueError):
    pass


class NoMatchError(ScgMineError):
    """An edit rule has no admissible context match in the model."""


class EdgeListError(ScgMineError, ValueError):
    """Base class for EdgeList format violations."""

    kind = "edgelist"


class MalformedHeader(EdgeListError):
    kind = "malformed-header"


class MalformedEdgeLine(EdgeListError):
    kind = "malformed-edge-line"


class IdLabelInconsistency(EdgeListError):
    kind = "id-label-inconsistency"


class DuplicateEdge(EdgeListError):
    kind = "duplicate-edge"


class WhitespaceInLabel(EdgeListError):
    kind = "whitespace-in-label"


class RemoteError(ScgMineError):
    pass


class NetworkError(RemoteError):
    def __init__(self, message, elapsed=None):
        super().__init__(message)
        self.elapsed = elapsed


class AuthenticationError(RemoteError):
    pass


class MalformedResponseError(RemoteError):
    pass


class StatisticsError(ScgMineError, ValueError):
    pass


class ConfigError(ScgMineError, ValueError):
    pass


class MissingArtifactError(ScgMineError, FileNotFoundError):
    def __init__(self, path):
        super().__init__(f"missing artifact: {path}")
        self.path = str(path)
