"""Exception hierarchy shared across the toolkit."""


class CfexError(Exception):
    """Base class for all toolkit errors."""


class MissingColumnError(CfexError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"missing required column(s): {', '.join(self.columns)}")


class NonNumericCellError(CfexError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric value {value!r} at row {row}, column {column!r}")


class UnknownLabelError(CfexError):
    def __init__(self, value, row=None):
        self.value = value
        self.row = row
        where = f" at row {row}" if row is not None else ""
        super().__init__(f"unknown label {value!r}{where}")


class EmptyDatasetError(CfexError):
    pass


class SchemaMismatchError(CfexError):
    pass


class ClassTooSmallError(CfexError):
    def __init__(self, label, count):
        self.label = label
        self.count = count
        super().__init__(f"class {label!r} has only {count} record(s); need at least 2")


class SingleClassDatasetError(CfexError):
    pass


class NonFiniteLossError(CfexError):
    pass


class LengthMismatchError(CfexError):
    pass


class IndexOutOfRangeError(CfexError):
    pass


class InvalidTargetError(CfexError):
    pass


class AllClassesFailedError(CfexError):
    pass


class MixedTransitionsError(CfexError):
    pass


class DegenerateVarianceError(CfexError):
    pass


class DegenerateSampleError(CfexError):
    pass


class InsufficientPoolError(CfexError):
    pass


class LeakageViolationError(CfexError):
    pass


class InvalidLockError(CfexError):
    pass
