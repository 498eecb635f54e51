"""Exception hierarchy shared by the whole kernel.

Exit-code mapping for the CLI: ParseError -> 1, PreconditionError
subclasses -> 2, BudgetError subclasses -> 3.
"""


class KernelError(Exception):
    """Base class for every error raised by this package."""


class ParseError(KernelError):
    """Malformed input document."""


class PreconditionError(KernelError):
    """An operation was called outside its contract."""


class BudgetError(KernelError):
    """A configured search bound was exhausted before a decision."""


class SearchBoundExceeded(BudgetError):
    """Semigroup membership search exceeded its node budget."""


class BudgetExceeded(BudgetError):
    """An iteration budget (resolution, factorization depth) ran out."""


class NotPointed(PreconditionError):
    """Cone has nonzero lineality where a pointed cone is required."""


class ZeroMonoid(PreconditionError):
    """An operation produced the zero monoid (an ideal generator became a unit)."""


class NotCancellative(PreconditionError):
    """Monoid or scheme has a nonempty monomial ideal where cancellative input is required."""


class UnsupportedPushout(PreconditionError):
    """Pushout legs are neither ideal-quotients nor localizations."""


class UnsupportedPullback(PreconditionError):
    """Fiber product legs are neither open nor equivariant closed immersions."""


class UnsupportedImage(PreconditionError):
    """Scheme-theoretic image outside the supported chart shapes."""


class UnsupportedGrading(PreconditionError):
    """Graded monoid is not generated in degrees 0 and 1."""


class BadGluing(PreconditionError):
    """Gluing data is not a consistent system of open identifications."""


class NotToric(PreconditionError):
    """Scheme fails one of: separated, connected, torsionfree, normal."""

    def __init__(self, failed_property: str):
        self.failed_property = failed_property
        super().__init__(f"scheme is not toric: fails '{failed_property}'")


class NotGenericPreserving(PreconditionError):
    """Morphism does not carry the generic point to the generic point."""


class NotInSupport(PreconditionError):
    """Vector lies outside the support of the fan."""


class NotSimplicial(PreconditionError):
    """Fan has a non-simplicial cone where simplicial input is required."""


class NotSeparated(PreconditionError):
    """Scheme is not separated."""


class EmptyProj(PreconditionError):
    """All positive-degree elements are nilpotent; Proj is empty."""


class BoundTooSmall(PreconditionError):
    """Relation search was truncated below a provably necessary degree."""


class NotCartesian(PreconditionError):
    """Square is not cartesian."""


class WitnessInvalid(PreconditionError):
    """Density witness does not satisfy its height condition."""
