"""Exception hierarchy shared by all stages."""


class DecompositionError(Exception):
    """Base class for every error raised by this package."""


class EmptySeries(DecompositionError):
    pass


class NonFiniteValue(DecompositionError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"non-finite value at index {index}")


class LeadingOrTrailingMissing(DecompositionError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"missing value at boundary index {index} cannot be imputed")


class LabelLengthMismatch(DecompositionError):
    pass


class InvalidConfig(DecompositionError):
    pass


class SeriesTooShort(DecompositionError):
    pass


class OracleSizeExceeded(DecompositionError):
    pass


class SegmentTooShort(DecompositionError):
    pass


class EvenWindow(DecompositionError):
    pass


class WindowTooLarge(DecompositionError):
    pass


class AllPointsFlagged(DecompositionError):
    pass


class TooManyAnomalies(DecompositionError):
    """Flag count exceeded the configured anomaly-fraction cap."""


class PeriodTooLarge(DecompositionError):
    pass


class PeriodMissing(DecompositionError):
    pass


class NonPositiveValueForMultiplicative(DecompositionError):
    def __init__(self, index):
        self.index = index
        super().__init__(
            f"multiplicative model requires positive values; offending index {index}"
        )


class InvalidSpec(DecompositionError):
    pass


class StageError(DecompositionError):
    """Wraps a stage failure with the stage name (and segment id if known)."""

    def __init__(self, stage, cause, segment_id=None):
        self.stage = stage
        self.segment_id = segment_id
        where = stage if segment_id is None else f"{stage} (segment {segment_id})"
        super().__init__(f"[{where}] {cause}")
