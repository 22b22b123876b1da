"""Exception hierarchy.

``ConfigError`` subclasses signal bad user input (CLI exit code 2); everything
else deriving from ``ClusterExplainError`` is a runtime failure (exit code 1).
"""


class ClusterExplainError(Exception):
    pass


class ConfigError(ClusterExplainError, ValueError):
    pass


class ParseError(ClusterExplainError, ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class MissingColumn(ClusterExplainError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing column"


class MissingFile(ClusterExplainError, FileNotFoundError):
    pass


class DegenerateFeature(ClusterExplainError, ValueError):
    pass


class InterceptAlreadyPresent(ClusterExplainError, ValueError):
    pass


class InvalidFractions(ConfigError):
    pass


class InvalidSpec(ConfigError):
    pass


class InvalidK(ConfigError):
    pass


class InvalidCounts(ClusterExplainError, ValueError):
    pass


class LengthMismatch(ClusterExplainError, ValueError):
    pass


class DimensionMismatch(ClusterExplainError, ValueError):
    pass


class LabelMissing(ClusterExplainError, ValueError):
    pass


class BadLabel(ClusterExplainError, ValueError):
    pass


class AllClustersDropped(ClusterExplainError, ValueError):
    pass


class UnknownCluster(ClusterExplainError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown cluster"


class TooFewSamples(ClusterExplainError, ValueError):
    pass


class SContainsIntercept(ClusterExplainError, ValueError):
    pass


class PipelineError(ClusterExplainError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
