"""Exception hierarchy for dmrsense"""


class DmrsenseError(Exception):
    """Base class for all dmrsense errors"""


class ConfigurationError(DmrsenseError, ValueError):
    """Invalid parameter value, inconsistent configuration or unknown config key"""


class ConfigSyntaxError(ConfigurationError):
    """A config file line that is not of the form key = value"""


class DegenerateConfigurationError(ConfigurationError):
    """Lattice or Fisher matrix too small or singular to produce a bound"""


class EmptyRequestError(DmrsenseError, ValueError):
    """A sequence of zero length was requested"""


class ShapeError(DmrsenseError, ValueError):
    """Array dimensions, occupancy patterns or stream lengths do not match"""


class OutOfWindowError(DmrsenseError, ValueError):
    """A delay or index falls outside the available observation window"""


class NoPeakError(DmrsenseError, RuntimeError):
    """Peak search was attempted on an empty or all-zero grid"""


# Errors the CLI reports as validation failures (exit code 3)
VALIDATION_ERRORS = (ConfigurationError, EmptyRequestError, ShapeError, OutOfWindowError)
