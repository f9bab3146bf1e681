"""Exception types shared across the toolkit.

Every error a caller is expected to branch on gets its own class; generic
misuse (bad argument types etc.) raises plain ValueError/TypeError.
"""


class ImpulsekitError(Exception):
    """Base class for all toolkit-specific errors."""


# --- trajectory features ---------------------------------------------------

class TooFewSamples(ImpulsekitError):
    """Trajectory has fewer samples than the operation needs."""


class NonPositiveInterval(ImpulsekitError):
    """A non-positive inter-sample time interval survived parsing."""


class DegenerateChord(ImpulsekitError):
    """AUC chord endpoints coincide."""


class NotAStopTrial(ImpulsekitError):
    """Stopping distance requested for a trial without a stop signal."""


# --- per-subject task metrics ----------------------------------------------

class NoStopTrials(ImpulsekitError):
    pass


class NoGoTrials(ImpulsekitError):
    pass


class NoGoRTs(ImpulsekitError):
    """No usable go response times under the chosen omission policy."""


class DegenerateStopRate(ImpulsekitError):
    """Stop-failure rate of 0 or 1 leaves the SSRT undefined."""


class TooFewTrials(ImpulsekitError):
    pass


class MissingField(ImpulsekitError):
    """A quality policy requires a summary field that is not populated."""


# --- discounting ------------------------------------------------------------

class InvalidParameter(ImpulsekitError):
    """Discounting parameter outside its valid domain."""


class NoControlTrials(ImpulsekitError):
    pass


class NoInformativeTrials(ImpulsekitError):
    """All non-control choices identical; fit is bound-clamped, not raised."""


# --- statistics ---------------------------------------------------------------

class EmptyInput(ImpulsekitError):
    pass


class WeightsNotCentered(ImpulsekitError):
    """Contrast weights do not sum to zero."""


class ShapeMismatch(ImpulsekitError):
    pass


class UnbalancedDesign(ImpulsekitError):
    """Repeated-measures data is not a complete balanced design."""


class SingularDesign(ImpulsekitError):
    """Collinear predictors make the regression unsolvable."""


class InsufficientN(ImpulsekitError):
    pass


# --- simulator ----------------------------------------------------------------

class InvalidParams(ImpulsekitError):
    pass


class InvalidSpec(ImpulsekitError):
    pass


# --- session log parsing --------------------------------------------------------

class SchemaError(ImpulsekitError):
    """Structural problem in a session log; message names the field/trial."""


class MonotonicityError(SchemaError):
    """Pointer-sample timestamps are not strictly increasing."""


class SessionRangeError(SchemaError):
    """A value is outside the documented protocol set (strict mode only)."""
