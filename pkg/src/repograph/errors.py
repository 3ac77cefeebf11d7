"""Exception types shared across the package."""


class RepoGraphError(Exception):
    """Base class for all package-specific errors."""


# --- numeric kernel ---------------------------------------------------------

class ShapeMismatch(RepoGraphError):
    pass


class AllMaskedRow(RepoGraphError):
    """A softmax row (or an attention window) had no unmasked entries."""


class NonFiniteLoss(RepoGraphError):
    """Training produced NaN/inf; carries the epoch and loss diagnostics."""


# --- ingestion --------------------------------------------------------------

class NotARepository(RepoGraphError):
    pass


class CorruptObject(RepoGraphError):
    def __init__(self, sha: str, detail: str = ""):
        super().__init__(f"corrupt git object {sha}: {detail}")
        self.sha = sha


class RateLimited(RepoGraphError):
    def __init__(self, reset_time: int | None):
        super().__init__(f"rate limited; resets at {reset_time}")
        self.reset_time = reset_time


class AuthFailed(RepoGraphError):
    pass


class MalformedRecord(RepoGraphError):
    pass


# --- graph ------------------------------------------------------------------

class SchemaMismatch(RepoGraphError):
    pass


class ProvenanceMismatch(RepoGraphError):
    pass


class MalformedGraphFile(RepoGraphError):
    def __init__(self, path: str, detail: str, line: int | None = None,
                 offset: int | None = None):
        where = f" at line {line}" if line is not None else ""
        where += f" offset {offset}" if offset is not None else ""
        super().__init__(f"{path}{where}: {detail}")
        self.path, self.line, self.offset = path, line, offset


# --- learning ---------------------------------------------------------------

class GraphTooSmall(RepoGraphError):
    pass


class SingleTypeGraph(RepoGraphError):
    pass


class EmptyInput(RepoGraphError):
    pass


class InvalidPattern(RepoGraphError):
    pass


class NoSeedFound(RepoGraphError):
    pass


class UnknownCenter(RepoGraphError):
    pass


class UnknownNode(RepoGraphError):
    pass


class EmptyIndex(RepoGraphError):
    pass


class EmptyDataset(RepoGraphError):
    pass


class SchemaError(RepoGraphError):
    def __init__(self, path: str, field: str, detail: str):
        super().__init__(f"{path}: field '{field}': {detail}")
        self.path, self.field = path, field


class DanglingNodeRef(RepoGraphError):
    def __init__(self, node_ids):
        super().__init__(f"unknown node reference(s): {sorted(node_ids)}")
        self.node_ids = sorted(node_ids)


class InsufficientStructure(RepoGraphError):
    pass


class EncoderUnavailable(RepoGraphError):
    pass


# --- router / service -------------------------------------------------------

class EmptyQuery(RepoGraphError):
    pass


class RouterParseError(RepoGraphError):
    """LLM response did not contain the expected labeled lines."""


class BackendUnavailable(RepoGraphError):
    def __init__(self, backend: str, detail: str = ""):
        super().__init__(f"backend '{backend}' unavailable: {detail or 'artifact not loaded'}")
        self.backend = backend


class ArtifactMissing(RepoGraphError):
    pass
