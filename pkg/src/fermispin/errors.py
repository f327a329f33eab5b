"""Exception types shared across the package."""


class SectorError(ValueError):
    """Operands live in different (M, particle-number) sectors or bases."""


class NumericalPreconditionError(ValueError):
    """A numerical precondition (purity, normalization, gap) does not hold."""


class PurityError(NumericalPreconditionError):
    pass


class OpenShellError(NumericalPreconditionError):
    """Degenerate one-body levels straddle the Fermi level."""


class SectorTooLargeError(NumericalPreconditionError):
    pass


class FormatError(ValueError):
    """Malformed input file; carries the offending position."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ConfigError(FormatError):
    pass
