"""Exception hierarchy shared by every module.

Each concrete error carries an ``exit_code`` so the command line can map
failures to distinct process statuses without a lookup table of its own.
"""


class CrmGraphError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# ingestion / store

class MalformedCsv(CrmGraphError):
    exit_code = 10


class MissingColumn(MalformedCsv):
    exit_code = 11

    def __init__(self, column):
        super().__init__(f"missing column: {column}")
        self.column = column


class DuplicateId(MalformedCsv):
    exit_code = 12

    def __init__(self, sales_id, row):
        super().__init__(f"duplicate sales_enquiry_id {sales_id!r} at row {row}")
        self.sales_id = sales_id
        self.row = row


class EmptyCell(MalformedCsv):
    exit_code = 13

    def __init__(self, row, column):
        super().__init__(f"empty cell at row {row}, column {column}")
        self.row = row
        self.column = column


class EmptyRecords(CrmGraphError):
    exit_code = 14


class InvalidMapping(CrmGraphError):
    exit_code = 15


class NoEdges(CrmGraphError):
    exit_code = 20


class NoLabeledPair(CrmGraphError):
    exit_code = 21


class InvalidProjection(CrmGraphError):
    exit_code = 22


class UnknownNodeInEdge(InvalidProjection):
    exit_code = 23


class MissingTrainFlag(InvalidProjection):
    exit_code = 24


class DisconnectedGraph(InvalidProjection):
    exit_code = 25


# numerics

class NotConverged(CrmGraphError):
    exit_code = 30

    def __init__(self, what, iterations, residual):
        super().__init__(
            f"{what} did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class DimensionMismatch(CrmGraphError):
    exit_code = 31


class NonFiniteLoss(CrmGraphError):
    exit_code = 32

    def __init__(self, epoch):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


class ConfigError(CrmGraphError):
    exit_code = 33


class DegenerateLabels(CrmGraphError):
    exit_code = 34


# evaluation

class TooFewSamples(CrmGraphError):
    exit_code = 40


class SingleClass(CrmGraphError):
    exit_code = 41


class UnknownAttribute(CrmGraphError):
    exit_code = 42


class ReportError(CrmGraphError):
    exit_code = 43
