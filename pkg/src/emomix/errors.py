"""Exception and warning types shared across the package.

Exceptions signal contract violations that abort an operation; warning
categories mark degraded-but-usable outcomes (the operation still returns
a result, flagged accordingly).
"""


class EmomixError(Exception):
    """Base class for all package errors."""


# --- dataset ingestion ---

class MissingFile(EmomixError):
    pass


class SchemaMismatch(EmomixError):
    pass


class NonFiniteFeature(EmomixError):
    def __init__(self, sample_id, column):
        self.sample_id = sample_id
        self.column = column
        super().__init__(f"non-finite feature value at id={sample_id!r}, column={column!r}")


class UnpairedSample(EmomixError):
    def __init__(self, ids):
        self.ids = list(ids)
        super().__init__(f"samples present in only one file: {self.ids}")


class DuplicateSampleId(EmomixError):
    def __init__(self, ids):
        self.ids = list(ids)
        super().__init__(f"duplicated sample ids: {self.ids}")


class LabelOutOfRange(EmomixError):
    pass


class NoCategoryMetadata(EmomixError):
    pass


# --- stratification ---

class EmptyInput(EmomixError):
    pass


class NonFiniteLabel(EmomixError):
    pass


class FoldCountExceedsClusterSize(UserWarning):
    """A cluster has fewer samples than folds; some folds miss that class."""


# --- mixing ---

class FeatureDimensionMismatch(EmomixError):
    pass


# --- preprocessing ---

class TooFewRows(EmomixError):
    pass


class ThresholdOutOfRange(EmomixError):
    pass


# --- learners ---

class NonFiniteInput(EmomixError):
    pass


class DimensionMismatch(EmomixError):
    pass


class DidNotConverge(UserWarning):
    """Coordinate descent hit its iteration cap; the model is still returned."""


class SolverStalled(UserWarning):
    """The SVR dual solver hit its iteration cap; the model is still returned."""


# --- search ---

class EmptyCandidates(EmomixError):
    pass


class NoCandidates(EmomixError):
    pass


# --- evaluation ---

class LengthMismatch(EmomixError):
    pass


class EmptyVector(EmomixError):
    pass


class ZeroVarianceTruth(EmomixError):
    pass


class FoldPlanMissing(EmomixError):
    pass


class LeakageDetected(EmomixError):
    """A train-side sample id appeared in its fold's test set."""


# --- cli ---

class MissingPriorStage(EmomixError):
    pass


class ConfigInvalid(EmomixError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"config field {field!r}: {reason}")
