class SyncscopeError(Exception):
    """Base class for all syncscope errors."""
    pass

class ParameterError(SyncscopeError, ValueError):
    """Raised when a numeric parameter is outside its valid range."""
    pass

class EnvelopeDomainError(SyncscopeError):
    """Raised when a complex angle or a sampled trajectory is not usable."""
    pass

class ChannelError(SyncscopeError):
    """Raised when a channel is malformed."""
    pass

class PoleProximityError(ChannelError):
    """Raised when a channel or filter is evaluated too close to one of its poles."""

    def __init__(self, message: str, factor_index: int = -1):
        super().__init__(message)
        self.factor_index = factor_index

class DegenerateChannelError(ChannelError):
    """Raised when a channel has a pole at the carrier, j*omega0."""
    pass

class IntegrationError(SyncscopeError):
    """Raised when a fixed RK4 step lies outside the integrator's stability region."""
    pass

class NetworkError(SyncscopeError):
    """Raised when the node/edge description cannot be assembled."""
    pass

class ConnectivityError(NetworkError):
    """Raised when an active node is not reachable through the branch network."""
    pass

class NearDefectiveError(NetworkError):
    """Raised when the eigenvector matrix of K_H is too ill-conditioned to use."""
    pass

class DegenerateLockError(SyncscopeError):
    """Raised when a node receives no signal to lock onto."""
    pass

class UnsupportedDynamicsError(SyncscopeError):
    """Raised when the inertia dynamics T(s) is outside the supported family."""
    pass

class ResonanceError(SyncscopeError):
    """Raised when the loop gain is evaluated at a modal resonance."""

    def __init__(self, message: str, mode_index: int = -1):
        super().__init__(message)
        self.mode_index = mode_index

class SimulationError(SyncscopeError):
    """Raised when a simulation cannot be set up."""
    pass

class UnsupportedGainModeError(SimulationError):
    """Raised when a channel cannot be simulated in the requested gain mode."""
    pass

class ConfigError(SyncscopeError):
    """Base class for configuration document errors."""
    pass

class ConfigSyntaxError(ConfigError):
    """Raised when the document is not valid JSON."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.line = line
        self.column = column

class ConfigValidationError(ConfigError):
    """Raised when a field of the document has an invalid value or is unknown."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field

class DuplicateIdError(ConfigError):
    """Raised when two nodes share an id."""
    pass

class UnknownReferenceError(ConfigError):
    """Raised when a channel, branch or perturbation names an undeclared node."""
    pass
