"""Exception types shared across the package."""


class ModulusMismatchError(ValueError):
    """Two operands live in different rings."""


class ConfigurationError(ValueError):
    """Session or scenario parameters are inconsistent."""


class ProtocolError(RuntimeError):
    """A party received data that cannot occur in an honest run."""


class SessionAborted(Exception):
    """A party stopped the protocol after an eavesdropping check.

    This is an expected outcome under attack, not a bug. ``stage`` names the
    check that tripped and ``error_rate`` is the observed decoy error rate.
    """

    def __init__(self, stage, error_rate):
        super().__init__(f"aborted at {stage}: decoy error rate {error_rate:.4f}")
        self.stage = stage
        self.error_rate = error_rate
