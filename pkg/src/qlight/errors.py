"""Exception types shared across the package.

Argument problems raise plain ``ValueError``; the classes below mark the
failure modes that the command-line front end maps to distinct exit codes.
"""


class SizeError(ValueError):
    """A joint Hilbert-space dimension exceeds the configured cap."""

    def __init__(self, dim, max_dim, what="operator"):
        self.dim = dim
        self.max_dim = max_dim
        super().__init__(f"{what} dimension {dim} exceeds the cap of {max_dim}")


class UnsupportedRepresentationError(ValueError):
    """No regular Glauber-Sudarshan P function exists for the requested state."""


class ContractError(ValueError):
    """A call that is well-formed but violates an operation's contract."""


class NumericalError(RuntimeError):
    """Non-finite values, ill-conditioned fits and similar numerical failures."""
