"""Semantic exception hierarchy.

Every domain error raised by this package derives from :class:`ZbestError`,
so callers can catch one base class. Errors that signal a violated input
contract also derive from :class:`ValueError`.
"""


class ZbestError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDistribution(ZbestError, ValueError):
    """A finite law violates its invariants (negative mass, mass not 1, ...)."""


class ZeroVariance(ZbestError, ValueError):
    """An operation requires strictly positive variance."""


class NonzeroMean(ZbestError, ValueError):
    """An operation requires a centered (mean zero) distribution."""


class NegativeWeight(ZbestError, ValueError):
    """A reweighting factor is negative."""


class NotNormalized(ZbestError, ValueError):
    """Reweighting factors do not integrate to one under the triple's measure."""


class SupportViolation(ZbestError, ValueError):
    """A reweighting factor (or gain) vanishes where the coupling difference does not."""


class SignViolation(ZbestError, ValueError):
    """The difference-gain product is negative somewhere, so it cannot reweight."""


class NotExchangeable(ZbestError, ValueError):
    """A pair law is not invariant under coordinate swap."""


class RegressionViolation(ZbestError, ValueError):
    """The linear-regression condition of an exchangeable pair fails."""


class NotMonotone(ZbestError, ValueError):
    """A size-bias coupling has an atom with the coupled value below the base value."""


class DegenerateCoordinate(ZbestError, ValueError):
    """An indicator coordinate is deterministically 0 or 1."""


class MarginalMismatch(ZbestError, ValueError):
    """A conditional coupler's marginals disagree with the supplied joint law."""


class NegativeInput(ZbestError, ValueError):
    """Bound inputs must be nonnegative."""


class TooFewSamples(ZbestError, ValueError):
    """Empirical distance estimation needs at least two samples."""


class OddN(ZbestError, ValueError):
    """The lightbulb coupling construction requires an even number of stages."""


class NTooSmall(ZbestError, ValueError):
    """The requested stage count is below the supported minimum."""


class UnsupportedN(ZbestError, ValueError):
    """Exact enumeration is only feasible for small even stage counts."""


class PreconditionViolation(ZbestError, ValueError):
    """A coupling step was invoked outside the event where it is defined."""


class EmptyCandidateSet(ZbestError, RuntimeError):
    """The dagger construction needed an index from an empty candidate set.

    This surfaces a genuine gap in the published construction rather than
    masking it by resampling: when the auxiliary stage can have a single
    toggle of the required value and that toggle sits at the excluded index,
    no valid swap partner exists. With stages restricted to {2, ..., n-2}
    (possible for n >= 6) the candidate sets are provably never empty; for
    n = 4 no such restriction exists and the event has probability exactly
    1/8 under the uniform stage choice.
    """


class InvalidConfig(ZbestError, ValueError):
    """An experiment configuration violates its invariants."""


class IoError(ZbestError, OSError):
    """Reading or writing an experiment report failed."""
