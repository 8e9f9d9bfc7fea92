"""Exception hierarchy shared across the pipeline."""


class SlrError(Exception):
    """Base class for all pipeline errors."""


class ValidationError(SlrError):
    """A domain invariant was violated."""


class NotEquivalent(SlrError):
    """merge_records called on two records that are not duplicates."""


class QuerySyntaxError(SlrError):
    """Search query could not be parsed.

    Carries the byte offset of the failure and the set of token kinds that
    would have been accepted there.
    """

    def __init__(self, message, offset, expected):
        super().__init__(f"{message} at byte {offset} (expected {sorted(expected)})")
        self.offset = offset
        self.expected = frozenset(expected)


class DialectUnsupported(SlrError):
    """Query contains a construct the target provider dialect cannot express."""

    def __init__(self, construct):
        super().__init__(f"dialect cannot express {construct}")
        self.construct = construct


class GatewayError(SlrError):
    """Base class for model-gateway failures."""


class MissingVariable(GatewayError):
    def __init__(self, name):
        super().__init__(f"template placeholder not supplied: {name}")
        self.name = name


class UnknownVariable(GatewayError):
    def __init__(self, name):
        super().__init__(f"variable not used by template: {name}")
        self.name = name


class SchemaViolation(GatewayError):
    """Model output failed schema validation after all retries."""

    def __init__(self, message, raw_text=None):
        super().__init__(message)
        self.raw_text = raw_text


class ProviderTimeout(GatewayError):
    pass


class ProviderHttp(GatewayError):
    def __init__(self, status, message=""):
        super().__init__(message or f"provider returned HTTP {status}")
        self.status = status


class MockMiss(GatewayError):
    """The mock scenario has no response for this call."""

    def __init__(self, template_id, variables):
        super().__init__(
            f"no scenario entry for template {template_id!r} with variables {variables!r}"
        )
        self.template_id = template_id
        self.variables = variables


class NoContent(SlrError):
    """Record has neither abstract nor fulltext."""


class InvalidParams(SlrError):
    """Chunking parameters out of range."""


class AllProvidersFailed(SlrError):
    """Every retrieval provider errored; nothing was fetched."""


class StageIncomplete(SlrError):
    """An operation needs a pipeline stage that has not completed."""


class StageFailed(SlrError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


class PausedAwaitingHuman(SlrError):
    """Run paused between stages per pause policy; not a failure."""

    def __init__(self, stage):
        super().__init__(f"paused after stage {stage}")
        self.stage = stage


class UnknownRun(SlrError):
    pass


class UnknownDecision(SlrError):
    pass


class RunFinalized(SlrError):
    """Mutation attempted on a finalized (immutable) run."""


class UnknownRating(SlrError):
    pass


class CorruptStore(SlrError):
    def __init__(self, path, message=""):
        super().__init__(message or f"unreadable run-store artifact: {path}")
        self.path = str(path)
