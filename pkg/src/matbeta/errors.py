"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` so that the command
line layer can map failures onto exit codes and JSON records.
"""


class MatBetaError(Exception):
    code = "error"


class DomainError(MatBetaError, ValueError):
    code = "domain"


class PoleError(DomainError):
    code = "pole"


class BranchError(DomainError):
    """A principal-branch power was requested at a point where it is undefined."""

    code = "branch"


class NotDissipativeError(BranchError):
    code = "not_dissipative"


class NotHermitianError(DomainError):
    code = "not_hermitian"


class SingularError(DomainError):
    code = "singular"


class SingularBlockError(SingularError):
    code = "singular_block"


class StructureError(DomainError):
    """A matrix does not satisfy the linear constraints of its family."""

    code = "structure"


class HypothesisViolation(DomainError):
    """A required inequality such as alpha > threshold does not hold."""

    code = "hypothesis"


class ConvergenceError(MatBetaError):
    code = "divergent"


class QuadratureFailure(MatBetaError):
    code = "quadrature"


class NonfiniteWeight(MatBetaError):
    code = "nonfinite_weight"


class InconsistentRatio(MatBetaError):
    code = "inconsistent_ratio"


class TruncationError(MatBetaError):
    code = "truncation"


class ConfigError(MatBetaError, ValueError):
    code = "config"
