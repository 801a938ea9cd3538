"""Exception types shared across the package."""


class RagplanError(Exception):
    """Base class for all package errors."""


class ConfigError(RagplanError):
    """Invalid engine or retrieval configuration."""


# --- corpus ---

class CorpusError(RagplanError):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(CorpusError):
    def __init__(self, entry_id: str):
        super().__init__(f"duplicate entry id {entry_id!r}")
        self.entry_id = entry_id


class IoFailure(CorpusError):
    pass


# --- scoring ---

class EmptyCorpus(RagplanError):
    pass


class UnknownDoc(RagplanError):
    def __init__(self, doc_id: str):
        super().__init__(f"unknown document id {doc_id!r}")
        self.doc_id = doc_id


class InsufficientCorpus(RagplanError):
    def __init__(self, size: int, needed: int):
        super().__init__(f"corpus holds {size} entries, need at least {needed}")
        self.size = size
        self.needed = needed


# --- embeddings ---

class DimMismatch(RagplanError):
    def __init__(self, a: int, b: int):
        super().__init__(f"vector dimensions differ: {a} vs {b}")


class ProviderUnavailable(RagplanError):
    pass


# --- gateway ---

class GatewayError(RagplanError):
    """Base for generator-gateway failures; carries the pipeline stage tag."""

    def __init__(self, message: str, stage: str = ""):
        super().__init__(message)
        self.stage = stage


class CassetteMiss(GatewayError):
    def __init__(self, request_hash: str, stage: str = ""):
        super().__init__(f"no recorded exchange for request {request_hash}", stage)
        self.request_hash = request_hash


class HttpError(GatewayError):
    def __init__(self, status: int, detail: str = "", stage: str = ""):
        super().__init__(f"HTTP {status}: {detail}", stage)
        self.status = status


class GatewayTimeout(GatewayError):
    pass


class PayloadTooLarge(GatewayError):
    pass


# --- prompt templates ---

class TemplateError(RagplanError):
    def __init__(self, placeholder: str, detail: str = ""):
        msg = detail or f"missing placeholder {placeholder!r}"
        super().__init__(msg)
        self.placeholder = placeholder


# --- plan DSL ---

class PlanSyntaxError(RagplanError):
    def __init__(self, line_no: int, reason: str, token: str = ""):
        super().__init__(f"line {line_no}: {reason}" + (f" (near {token!r})" if token else ""))
        self.line_no = line_no
        self.reason = reason
        self.token = token


class UnknownApi(RagplanError):
    def __init__(self, name: str, line_no: int = 0):
        super().__init__(f"line {line_no}: unknown api {name!r}")
        self.name = name
        self.line_no = line_no


class ArgError(RagplanError):
    def __init__(self, api: str, arg: str, detail: str = "", line_no: int = 0):
        super().__init__(f"line {line_no}: {api}: bad argument {arg!r}" + (f": {detail}" if detail else ""))
        self.api = api
        self.arg = arg
        self.line_no = line_no


# --- reference resolution ---

class ReferenceError_(RagplanError):
    pass


class UnresolvableReference(ReferenceError_):
    def __init__(self, expr: str):
        super().__init__(f"no object matches {expr!r}")
        self.expr = expr


class AmbiguousAnchor(ReferenceError_):
    def __init__(self, expr: str, count: int):
        super().__init__(f"anchor {expr!r} matches {count} objects")
        self.expr = expr
        self.count = count


# --- simulator / evaluation ---

class UnknownFamily(RagplanError):
    def __init__(self, family: str):
        super().__init__(f"unknown task family {family!r}")
        self.family = family


class EmptyInput(RagplanError):
    pass


class PipelineError(RagplanError):
    """Wraps a stage failure inside the retrieval pipeline."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause
