"""Exception hierarchy shared by all targraph modules."""


class GraphError(Exception):
    """Base class for every error raised by this package."""


class InvalidToken(GraphError):
    """Vertex or action token is empty, contains whitespace, or is a reserved word."""


class DuplicateArc(GraphError):
    """More than one arc declared for the same (source, destination) pair."""


class DanglingEndpoint(GraphError):
    """An arc endpoint (or the target) names a vertex that does not exist."""


class TargetHasOutgoing(GraphError):
    """The target vertex must have out-degree zero; loops at the target count."""


class InvalidWeight(GraphError):
    """Arc weight outside (0, 1]; zero-probability arcs must be pre-filtered."""


class MixedWeights(GraphError):
    """Some arcs carry weights and some do not; weights are all-or-nothing."""


class RowNotNormalized(GraphError):
    """Out-probabilities of a vertex (or a start distribution) do not sum to 1."""


class ModeViolation(GraphError):
    """Graph does not satisfy its declared mode, or an operation got the wrong mode."""


class GraphSyntaxError(GraphError):
    """Malformed graph or counts text; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AnnotationMismatch(GraphError):
    """Decomposition passed to the DOT renderer references unknown vertices."""


class InternalInconsistency(GraphError):
    """A structural invariant broke mid-analysis; indicates a bug upstream."""


class SolveFailure(GraphError):
    """Linear hitting-time system was singular or iteration did not converge."""


class VertexSetMismatch(GraphError):
    """Graphs being compared do not share the same vertex set."""


class TargetMismatch(GraphError):
    """Graphs being compared do not share the same target vertex."""


class StartUnknown(GraphError):
    """Simulation start vertex is not a vertex of the graph."""


class EmptyRow(GraphError):
    """A named non-target vertex has no outgoing transition counts."""
