"""Exception hierarchy shared by all modules.

Each class maps to a CLI exit code (see cli.EXIT_CODES): input problems
exit 2, resolution-floor violations exit 3, capability mismatches exit 4,
anything else exit 5.
"""


class QstratError(Exception):
    """Base class for all toolkit errors."""


class InputError(QstratError):
    """Malformed or out-of-contract input (bad radii, non-finite data, ...)."""


class DomainError(InputError):
    """A point or region falls outside a field's sampling domain."""


class ResolutionError(QstratError):
    """A requested scale sits below the measure's resolution floor."""


class CapabilityError(QstratError):
    """The input carries too little structure for the requested operation
    (e.g. a scalar density where a full 2-form field is needed)."""


class EmptyMeasureError(InputError):
    """An operation that needs positive mass met an empty ball."""


class OracleScaleError(InputError):
    """A brute-force oracle was invoked beyond its documented size guard."""


class NonintegrableError(InputError):
    """A requested synthetic density is not locally integrable."""
