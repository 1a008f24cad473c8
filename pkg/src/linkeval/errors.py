"""Exception hierarchy shared by every linkeval module."""


class LinkEvalError(Exception):
    """Base class for all errors raised by linkeval."""


class DomainError(LinkEvalError, ValueError):
    """An argument lies outside its admissible range."""


class ParseError(LinkEvalError, ValueError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DegenerateSplitError(LinkEvalError, ValueError):
    """A train/probe split would leave the probe set empty."""


class UndefinedMetricError(LinkEvalError, ValueError):
    """The metric is not defined for this candidate list (e.g. no positives)."""


class UndefinedCorrelationError(LinkEvalError, ValueError):
    """A rank correlation has a zero-variance argument."""


class NumericError(LinkEvalError, ArithmeticError):
    """A linear-algebra routine failed or produced non-finite scores."""


class ConfigError(LinkEvalError, ValueError):
    """Invalid experiment configuration; ``problems`` maps field name to message."""

    def __init__(self, problems):
        self.problems = dict(problems)
        lines = [f"  {k}: {v}" for k, v in self.problems.items()]
        super().__init__("invalid configuration:\n" + "\n".join(lines))


class IncompatibleInputError(LinkEvalError, ValueError):
    """Inputs that must agree (e.g. algorithm sets across networks) do not."""
