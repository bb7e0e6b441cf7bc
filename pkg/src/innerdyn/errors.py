"""Exception types shared across the package."""


class InnerdynError(Exception):
    """Base class for all package-specific errors."""


class PoleProximity(InnerdynError):
    """Evaluation point is too close to a pole 1/conj(a) of a Blaschke factor."""


class LiftNonMonotone(InnerdynError):
    """The sampled argument lift decreased; the map data is invalid."""


class RootEscape(InnerdynError):
    """A polynomial root left the closed unit disk beyond tolerance."""


class LogSingularity(InnerdynError):
    """A disk preimage sits at the origin, making log(1/|root|) infinite."""


class ZeroMultiplier(InnerdynError):
    """F'(0) vanishes, so no linearizing coordinate exists."""


class BudgetExceeded(InnerdynError):
    """A requested enumeration would exceed the node budget."""


class NotFixed(InnerdynError):
    """The supplied base point is not a boundary fixed point within tolerance."""


class ExceptionalPoint(InnerdynError):
    """The orbit hits a partition endpoint, so the coding is ambiguous."""


class NoConvergence(InnerdynError):
    """An eigenvalue or root iteration failed to converge."""


class GapLost(InnerdynError):
    """The subleading ratio came too close to 1 for a perturbed operator."""


class SummabilityViolated(InnerdynError):
    """A required summability quantity diverges under truncation refinement."""


class DivergentSeries(InnerdynError):
    """The operator series for the Poincare function does not converge."""


class NoReturnWithinCap(InnerdynError):
    """An orbit failed to return to the core interval within the iteration cap."""


class BisectionFail(InnerdynError):
    """A monotone bisection could not bracket its target."""


class NotDoublyParabolic(InnerdynError):
    """The supplied map has a translation term at infinity."""


class TailBoundExceeded(InnerdynError):
    """The estimated stratum tail exceeds the allowed fraction of the target."""


class DegenerateVariance(InnerdynError):
    """The supplied asymptotic variance is numerically zero."""


class NonDecaying(InnerdynError):
    """Correlation terms failed to decay geometrically."""


class ConfigError(InnerdynError):
    """An experiment configuration failed validation."""
