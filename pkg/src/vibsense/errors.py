"""Exception hierarchy shared across the library."""


class VibsenseError(Exception):
    """Base class for all vibsense errors."""


class DimensionMismatch(VibsenseError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(VibsenseError):
    """Matrix required to be SPD has a nonpositive or negligible pivot."""


class NoConvergence(VibsenseError):
    """Iterative eigensolver failed to converge."""


class SingularBlock(VibsenseError):
    """A block required to be invertible is numerically singular."""


class InvalidSpec(VibsenseError):
    """Model specification contains nonphysical values."""


class ParseError(VibsenseError):
    """File could not be parsed in the expected format."""


class AsymmetricInput(VibsenseError):
    """Imported matrix is not symmetric within tolerance."""


class SingularSlaveBlock(VibsenseError):
    """Slave stiffness block is singular; constraint modes undefined."""


class UnknownLabel(VibsenseError):
    """A channel label does not resolve to any model degree of freedom."""


class MeasuredModalCoordinate(VibsenseError):
    """A measured label resolves to a modal coordinate, not a physical DOF."""


class SingularEffectiveStiffness(VibsenseError):
    """Effective stiffness of the integrator cannot be factorized."""


class SingularUnmeasuredBlock(VibsenseError):
    """Unmeasured block of the effective stiffness is singular."""


class NonFiniteMeasurement(VibsenseError):
    """Measurement sample contains NaN or infinity."""


class SampleRateMismatch(VibsenseError):
    """Measurement sample interval does not match the integrator step."""


class SingularNormalMatrix(VibsenseError):
    """Unregularized normal equations are singular."""


class UnknownProfile(VibsenseError):
    """Requested excitation profile id does not exist."""


class InvalidBand(VibsenseError):
    """Frequency band is empty or exceeds Nyquist."""


class GridMismatch(VibsenseError):
    """Two series do not share the same sample grid."""


class EmptyBand(VibsenseError):
    """Requested frequency band contains no spectrum bins."""


class DivergedFilter(VibsenseError):
    """Kalman filter covariance grew beyond the overflow guard."""


class ConfigError(VibsenseError):
    """Run configuration is missing or malformed; message names the key."""
