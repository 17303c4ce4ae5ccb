"""Exception hierarchy shared across the package."""


class RepoKgError(Exception):
    """Base class for all repokg errors."""


class SchemaError(RepoKgError):
    """A node or edge violates the typed graph schema."""


class UnknownNodeError(RepoKgError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"unknown node id: {node_id}")


class DimensionMismatchError(RepoKgError):
    """Embedding dimension differs from the graph's embedding_dim."""


class SnapshotError(RepoKgError):
    """Snapshot could not be parsed or written."""


class SnapshotVersionError(SnapshotError):
    def __init__(self, found):
        self.found = found
        super().__init__(f"unsupported snapshot format_version: {found!r} (supported: 1)")


class QueryValidationError(RepoKgError):
    """A read_query request does not match any allowed request form."""


class RevisionMismatchError(RepoKgError):
    """Graph revision does not match the change set's old revision."""


class IngestError(RepoKgError):
    """Repository checkout or revision could not be used."""


class EnrichmentError(RepoKgError):
    """Enrichment cannot proceed (distinct from per-node soft failures)."""


class ProviderError(RepoKgError):
    """An external provider call failed after retries."""


class MetricUndefinedError(RepoKgError):
    """A metric precondition is violated (e.g. recall with empty relevant set)."""
