"""Exception hierarchy for the conformal-dynamics laboratory."""


class ConfdynError(Exception):
    """Base class for all library-specific errors."""


# --- circle maps / partitions ---

class DegenerateArc(ConfdynError):
    """Arc is a point or spans a half circle or more where forbidden."""


class OutsidePieceDomain(ConfdynError):
    """Point lies outside the declared extension neighborhood of a piece."""


class NotInvariant(ConfdynError):
    """Break-point set is not forward-invariant under the map."""


class NotInjectiveOnPiece(ConfdynError):
    """Map wraps more than once over a partition arc."""


class NotPeriodic(ConfdynError):
    """Point is not periodic under the map (within tolerance)."""


class ClassificationUnstable(ConfdynError):
    """Taylor-law fit at a multiplier-one point did not stabilize."""


# --- conjugacy ---

class IncompatiblePartitions(ConfdynError):
    """Transition matrices differ or break-point conjugacy fails."""


class RefinementBudgetExceeded(ConfdynError):
    """Bracketing arc did not shrink below tolerance within the level budget."""


class NotBreakPoint(ConfdynError):
    """Requested point is not a break point of the partition."""


class NormalizationImpossible(ConfdynError):
    """Angle 0 is not a fixed point, so the rotation cannot be normalized."""


# --- extensions ---

class StencilOutOfDomain(ConfdynError):
    """Finite-difference stencil leaves the unit disk."""


# --- reflection groups ---

class PoleAtCenter(ConfdynError):
    """Circle inversion evaluated at the circle center."""


class OverlappingInteriors(ConfdynError):
    """Two circles of a packing have overlapping interiors."""


class TransversalIntersection(ConfdynError):
    """Two circles of a packing cross instead of touching."""


# --- rational maps ---

class IllConditioned(ConfdynError):
    """Root-finding residuals exceeded tolerance after polishing."""


class UnknownName(ConfdynError):
    """Unknown catalog entry."""


# --- quadrature domains ---

class NotUnivalent(ConfdynError):
    """Uniformizer fails injectivity on the stated side."""


class OutsideDomain(ConfdynError):
    """No preimage root on the domain's side: point not in the closure."""


class AmbiguousRoot(ConfdynError):
    """Two side-roots within tolerance (boundary double point)."""


class OverlappingDomains(ConfdynError):
    """Quadrature domains of a system have overlapping interiors."""


# --- suffridge ---

class CriticalPointsOffCircle(ConfdynError):
    """A critical point expected on the unit circle is off it."""


class NotSuffridge(ConfdynError):
    """Double-point count does not match an extremal curve."""


# --- cli ---

class UsageError(ConfdynError):
    """Command-line usage error (exit code 64)."""
