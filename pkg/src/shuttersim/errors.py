"""Exception hierarchy shared across the toolkit.

Everything raised for bad data derives from :class:`ShutterSimError`, so the
CLI can map any of them to a single "data error" exit code. Usage errors
(bad flags) are handled by argparse and never reach this hierarchy.
"""


class ShutterSimError(Exception):
    """Base class for all data/format errors raised by shuttersim."""


class DimensionError(ShutterSimError):
    """Image or band geometry is empty, mismatched, or out of bounds."""


class ParameterError(ShutterSimError):
    """A numeric parameter is outside its valid domain."""


class TemporalRangeError(ShutterSimError):
    """A requested exposure window is not covered by the source sequence."""


class EncodingError(ShutterSimError):
    """Linear/gamma encoding tags disagree between operands."""


class PairingError(ShutterSimError):
    """Two sequences that must form a pair violate the pairing contract."""


class FormatError(ShutterSimError):
    """A raw frame file has a bad magic, version, or header."""


class CorruptionError(FormatError):
    """A raw frame file is truncated or has trailing bytes."""


class ManifestError(ShutterSimError):
    """A manifest file cannot be parsed at all (distinct from violations)."""
