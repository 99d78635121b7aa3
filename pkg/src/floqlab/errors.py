"""Exception hierarchy shared by the solver, symmetry and CLI layers."""


class FloqlabError(Exception):
    """Base class for all package errors."""


class ModelParseError(FloqlabError, ValueError):
    """A custom-model document does not follow the schema."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")

    def __reduce__(self):
        return type(self), (self.field, self.message)


class ModelValidationError(FloqlabError, ValueError):
    """A model is well-formed but physically inconsistent (e.g. non-Hermitian)."""


class SolverError(FloqlabError, RuntimeError):
    """Base class for numerical failures of the Floquet solvers."""


class SolverAccuracyError(SolverError):
    pass


class TruncationError(SolverError):
    pass


class DefectiveMonodromyError(SolverError):
    pass


class NyquistError(FloqlabError, ValueError):
    pass


class CutoffError(FloqlabError, ValueError):
    pass


class SymmetryClassificationError(FloqlabError, RuntimeError):
    pass


class PairingError(FloqlabError, RuntimeError):
    pass


class InapplicableSymmetryError(FloqlabError, ValueError):
    """The symmetry holds but the requested rule's preconditions do not."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("; ".join(self.reasons))

    def __reduce__(self):
        return type(self), (self.reasons,)


class ConfigError(FloqlabError, ValueError):
    pass
