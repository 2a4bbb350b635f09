"""Exception types raised across the package."""


class LabelAugError(Exception):
    """Base class for all package errors."""


class DatasetFormatError(LabelAugError, ValueError):
    """A dataset file violates the on-disk format.

    ``line`` is the 1-based line number in the offending file (the header is
    line 1), or ``None`` when the problem is not tied to a single line.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class MalformedHeader(DatasetFormatError):
    pass


class MalformedEntry(DatasetFormatError):
    pass


class IndexOutOfRange(DatasetFormatError):
    def __init__(self, line, index, n_labels, path=None):
        self.index = index
        super().__init__(
            f"label index {index} out of range for {n_labels} labels",
            line=line, path=path)


class NonAscendingIndices(DatasetFormatError):
    pass


class WeightOutOfRange(DatasetFormatError):
    pass


class RowCountMismatch(DatasetFormatError):
    pass


class InvalidUtf8(DatasetFormatError):
    pass


class LabelSpaceMismatch(LabelAugError, ValueError):
    pass


class SoftWeightsPresent(LabelAugError, ValueError):
    pass


class ZeroFrequencyLabel(LabelAugError, ValueError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"label {label} has zero training frequency")


class SampleTooLarge(LabelAugError, ValueError):
    pass


class KExceedsPredictionDepth(LabelAugError, ValueError):
    pass


class EmptyTestPositives(LabelAugError, ValueError):
    pass


class EmptyDataset(LabelAugError, ValueError):
    pass


class UnknownLabel(LabelAugError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown label"


class ConfigError(LabelAugError, ValueError):
    pass
