"""Exception hierarchy shared by all pipeline stages.

``ValidationError`` subclasses are user/config problems (CLI exit 2);
everything else deriving from ``FieldlensError`` is a runtime failure (exit 1).
"""


class FieldlensError(Exception):
    pass


class ValidationError(FieldlensError):
    pass


# corpus
class MalformedInput(ValidationError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        super().__init__(f"malformed input at line {line_no}" + (f": {reason}" if reason else ""))


class EmptyCorpus(FieldlensError):
    pass


class LabelMismatch(ValidationError):
    pass


class UnknownField(ValidationError):
    def __init__(self, predicate):
        self.predicate = predicate
        super().__init__(f"filter references unknown field: {predicate!r}")


# graphs
class EmptyGraph(FieldlensError):
    pass


class ScopeError(FieldlensError):
    pass


class DegenerateMerged(FieldlensError):
    pass


class UnknownKind(ValidationError):
    pass


# topics
class NoLabelsFound(FieldlensError):
    pass


class BadMapFile(ValidationError):
    pass


# socionet
class MissingMetadata(FieldlensError):
    pass


class EmptyNetwork(FieldlensError):
    pass


# harvest
class AuthError(FieldlensError):
    pass


class RateLimited(FieldlensError):
    def __init__(self, retry_after: float):
        self.retry_after = retry_after
        super().__init__(f"rate limited; retry after {retry_after}s")


class SourceSchemaError(FieldlensError):
    pass


# report / cli
class IoError(FieldlensError):
    pass


class MissingArtifact(ValidationError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"missing artifact: {path} (run the producing stage first)")


class LabelerFailed(FieldlensError):
    pass
