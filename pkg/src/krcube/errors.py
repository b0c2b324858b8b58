"""Exception hierarchy.

Exit-code mapping used by the CLI: InvalidInput (and subclasses) are input
errors (exit 2); ResolutionInsufficiency and RestrictionError are computation
refusals / verification failures (exit 1).
"""


class KrCubeError(Exception):
    """Base class for all library errors."""


class InvalidInput(KrCubeError):
    """Precondition or schema violation in caller-supplied data."""


class CertificateInvalid(InvalidInput):
    """A nowhere-density certificate does not match the set it claims to certify."""


class ResolutionInsufficiency(KrCubeError):
    """An exact matching is forced below the available depth budget.

    ``required_depth`` carries the minimal depth that would suffice when that
    bound is known, else None (some obstructions persist at every depth).
    """

    def __init__(self, message: str, required_depth: int | None = None):
        super().__init__(message)
        self.required_depth = required_depth


class RestrictionError(KrCubeError):
    """A chain does not respect a closed set's tree structure level-wise.

    ``witness`` names the offending cylinder (a level word).
    """

    def __init__(self, message: str, witness: str | None = None):
        super().__init__(message)
        self.witness = witness
