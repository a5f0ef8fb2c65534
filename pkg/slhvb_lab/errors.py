"""Exception hierarchy for slhvb_lab.

Every error that signals bad input also derives from ``ValueError`` so it can be
raised from inside pydantic validators and surface as a ``ValidationError``.
"""


class SlhvbError(Exception):
    """Base class for all slhvb_lab errors."""


class DensityUnbounded(SlhvbError, ValueError):
    """Prior density is not bounded away from zero on its support."""


class InfeasibleMoments(SlhvbError, ValueError):
    """No Beta distribution has the requested mean and variance."""


class ZeroGap(SlhvbError, ValueError):
    """The two largest sampled means are tied."""


class EmptyPool(SlhvbError, ValueError):
    """No arm is available."""


class UnavailableArm(SlhvbError, ValueError):
    """An allocation names an arm that is not in the current window."""


class WrongTotal(SlhvbError, ValueError):
    """Pull counts do not add up to the required total."""


class GridInfeasible(SlhvbError, ValueError):
    """Exploration fractions cannot be made to sum to one."""


class BadKPrime(SlhvbError, ValueError):
    """Resampling size is outside [1, cohort size]."""


class ZeroPulls(SlhvbError, ValueError):
    """A confidence radius was requested for an arm with no pulls."""


class PhaseExhausted(SlhvbError, RuntimeError):
    """A BSE state was asked for a batch it has already emitted or finished."""


class RewardMismatch(SlhvbError, ValueError):
    """Observed rewards do not match the last emitted batch."""


class NoCards(SlhvbError, ValueError):
    """Randomized BSE was asked to allocate with no cards available."""


class TooFewRounds(SlhvbError, ValueError):
    """Not enough rounds remain after burn-in."""


class NonPositiveLoss(SlhvbError, ValueError):
    """A log-log fit received a loss that is zero or negative."""


class RankDeficient(SlhvbError, ValueError):
    """The DID design matrix cannot be fitted."""


class DegenerateVariance(SlhvbError, ValueError):
    """A standard error came out as zero."""


class ZeroBaseline(SlhvbError, ValueError):
    """Lift requested against a zero baseline."""


class UnknownScenario(SlhvbError, KeyError):
    """No scenario is registered under the given name."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown scenario"
