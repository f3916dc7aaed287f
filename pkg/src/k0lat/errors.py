"""Shared exception types for the k0lat engine."""


class K0Error(Exception):
    """Base class for all engine errors."""


class DimensionError(K0Error):
    """Incompatible matrix or vector dimensions."""


class AmbientMismatchError(K0Error):
    """Lattices live in different ambient spaces or over different base rings."""


class ValidationError(K0Error):
    """Instance data violates a declared axiom (associativity, unit, stability...)."""


class UnsupportedCharacteristicError(K0Error):
    """Trace-form radical computation requires a characteristic larger than the dimension."""


class UnstableDecompositionError(K0Error):
    """Decomposition fingerprints kept changing across precision doublings."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InconclusiveError(K0Error):
    """A search was exhausted without reaching a sound verdict."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class IncompatibleError(K0Error):
    """Gluing or splitting hypotheses fail on the supplied data."""


class IncompleteRegistryError(K0Error):
    """A required genus member, atom or S-object is missing from instance data."""
