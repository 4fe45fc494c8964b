"""Exception taxonomy shared across the package."""


class VerifierError(Exception):
    """Base class for all rollwave errors."""


class DomainViolation(VerifierError):
    """Input leaves the mathematical domain of an operation."""


class DivisionByZeroInterval(VerifierError):
    """Divisor interval contains zero."""


class PoleProximity(VerifierError):
    """Argument box touches (or cannot be separated from) a pole."""


class TailTooWide(VerifierError):
    """Series tail bound exceeds the requested precision budget."""


class StripExceeded(VerifierError):
    """Argument leaves the analyticity strip configured for a series."""


class DenominatorContainsZero(VerifierError):
    """A structural denominator enclosure touches zero."""


class NotRealCertified(VerifierError):
    """Imaginary part of a quantity known to be real excludes zero."""


class LengthMismatch(VerifierError):
    """Sample vector length inconsistent with the requested degree."""


class ShapeMismatch(VerifierError):
    """2D sample array shape inconsistent with the tensor grid."""


class InvalidSubdomain(VerifierError):
    """Second-derivative bound requested on a subdomain touching +-1."""


class InvalidNesting(VerifierError):
    """Stadium nesting 1 < rho_inner < rho_outer violated."""


class EnclosureBlowup(VerifierError):
    """A boundary piece produced an unbounded or invalid enclosure."""


class BoundBlowup(VerifierError):
    """A modulus bound could not be certified (e.g. lower bound <= 0)."""


class LeadingCoeffContainsZero(VerifierError):
    """Leading polynomial coefficient enclosure touches zero."""


class XiUnavailable(VerifierError):
    """Floquet exponent requested on a box touching its pole."""


class DerivOrderUnsupported(VerifierError):
    """Derivative order beyond what the module certifies."""
