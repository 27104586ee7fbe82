"""Exception hierarchy shared across the package.

Errors are grouped by pipeline stage so the CLI can map them to exit codes:
input/validation problems, estimation problems (weak shares, degenerate
ratios), and inference problems (bootstrap or variance machinery).
"""


class StrataBoundsError(Exception):
    """Base class for all package errors."""


# --- validation / input errors ------------------------------------------------

class MalformedRow(StrataBoundsError):
    def __init__(self, row: int, reason: str):
        self.row = row
        self.reason = reason
        super().__init__(f"row {row}: {reason}")


class DomainViolation(StrataBoundsError):
    """z outside {0,1} or d outside {0,1,2}."""


class EmptyCell(StrataBoundsError):
    """A (block, arm) or (z, d) cell required by an estimator has no weight."""


class UnsupportedShift(StrataBoundsError):
    """Target has covariate mass where the source has none."""


class OutOfRange(StrataBoundsError):
    """A unit's covariate falls outside the fitted bin edges."""


class InvalidConfig(StrataBoundsError):
    """A simulation or run configuration fails its invariants."""


class InvalidSpec(StrataBoundsError):
    """A bootstrap specification fails its invariants."""


# --- estimation errors --------------------------------------------------------

class WeakFirstStage(StrataBoundsError):
    """First stage at or below the configured floor."""


class WeakShare(StrataBoundsError):
    """A share appearing in a denominator is at or below the floor."""


class BoundsInverted(StrataBoundsError):
    """Lower bound exceeds upper bound beyond numerical tolerance."""


class TooLarge(StrataBoundsError):
    """Instance too large for exhaustive enumeration."""


class UnsupportedFamily(StrataBoundsError):
    """Outcome family without a closed-form or exact discrete treatment."""


# --- inference errors ---------------------------------------------------------

class TooManyFailures(StrataBoundsError):
    """More than the allowed fraction of bootstrap replicates failed."""


class SingularJacobian(StrataBoundsError):
    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(f"moment Jacobian ill-conditioned (cond={cond:.3e})")


class ZeroDensity(StrataBoundsError):
    """Kernel density estimate at the cutpoint below the floor."""


# --- diagnostics --------------------------------------------------------------

class MonotonicityDiagnostic(UserWarning):
    """Raw strata share negative beyond tolerance; data inconsistent with
    the one-directional take-up assumption beyond sampling noise."""


VALIDATION_ERRORS = (
    MalformedRow, DomainViolation, EmptyCell, UnsupportedShift, OutOfRange,
    InvalidConfig, InvalidSpec,
)
ESTIMATION_ERRORS = (
    WeakFirstStage, WeakShare, BoundsInverted, TooLarge, UnsupportedFamily,
)
INFERENCE_ERRORS = (TooManyFailures, SingularJacobian, ZeroDensity)
