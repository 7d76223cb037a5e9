"""Exception types shared across the library."""


class EntrocapError(Exception):
    """Base class for all library errors."""


class ValidationFailed(EntrocapError):
    """An object does not satisfy its structural invariants."""


class DimensionMismatch(EntrocapError):
    """Operands have incompatible dimensions."""


class InvalidTolerance(EntrocapError):
    """A tolerance argument is outside its admissible range."""


class Divergent(EntrocapError):
    """A spectral series fails to converge before the truncation cap."""


class OutOfBranch(EntrocapError):
    """A constraint level lies outside the branch where the request makes sense."""


class Unsolvable(EntrocapError):
    """The finite-level multiplier equation has no admissible solution."""


class UnboundedEntropy(EntrocapError):
    """The entropy supremum over the constraint set is infinite."""


class DegenerateState(EntrocapError):
    """The state's spectrum decays too slowly for the requested analysis."""


class EmptySet(EntrocapError):
    """A state set argument is empty."""


class MaxIterExceeded(EntrocapError):
    """The capacity iteration hit its step cap before reaching tolerance.

    The best iterate is attached as ``.result`` (its ``gap`` field records the
    remaining duality gap).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotAGroup(EntrocapError):
    """A list of unitaries is not closed under multiplication."""


class NotNormalized(EntrocapError):
    """A wave function does not have unit norm."""


class Condition45Fails(EntrocapError):
    """The summability condition for a converging-sequence family fails."""


class OutOfDomain(EntrocapError):
    """A state has (numerically) no overlap with the compression subspace."""


class ConfigInvalid(EntrocapError):
    """A batch configuration document failed validation."""


class IoError(EntrocapError):
    """Reading or writing a batch artifact failed."""
