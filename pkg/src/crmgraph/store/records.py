"""Sales records and CSV ingestion."""

import csv
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from ..errors import DuplicateId, EmptyCell, MalformedCsv, MissingColumn

ID_COLUMN = "sales_enquiry_id"
STATUS_COLUMN = "Status"
WON, LOST = "Won", "Lost"

# Categorical columns in dataset order.
ATTRIBUTE_COLUMNS = (
    "Product",
    "Seller",
    "Authority",
    "Comp_size",
    "Competitors",
    "Purch_dept",
    "Partnership",
    "Budgt_alloc",
    "Forml_tend",
    "RFI",
    "RFP",
    "Growth",
    "Posit_statm",
    "Source",
    "Client",
    "Scope",
    "Strat_deal",
    "Cross_sale",
    "Up_sale",
    "Deal_type",
    "Needs_def",
    "Att_t_client",
)
ALL_COLUMNS = ATTRIBUTE_COLUMNS + (STATUS_COLUMN, ID_COLUMN)

# Descriptive header names accepted in place of the short codes.
_ALIASES = {
    "product name": "Product",
    "seller name": "Seller",
    "company size": "Comp_size",
    "purchasing department": "Purch_dept",
    "budget allocation": "Budgt_alloc",
    "formal tender": "Forml_tend",
    "growth of a client": "Growth",
    "positive statements": "Posit_statm",
    "scope clarity": "Scope",
    "strategic deal": "Strat_deal",
    "cross sale": "Cross_sale",
    "up scale": "Up_sale",
    "deal type": "Deal_type",
    "needs defined": "Needs_def",
    "attention to client": "Att_t_client",
    "sales enquiry id": ID_COLUMN,
}

_STATUS_VALUES = {"won": WON, "lost": LOST, "loss": LOST}


def _canonical(name):
    return " ".join(name.replace("_", " ").split()).lower()


_HEADER_LOOKUP = {_canonical(c): c for c in ALL_COLUMNS}
_HEADER_LOOKUP.update(_ALIASES)


def normalize_status(value):
    """Map any casing of Won/Lost/Loss onto the two class values."""
    try:
        return _STATUS_VALUES[value.strip().lower()]
    except KeyError:
        raise MalformedCsv(f"unrecognised status value {value!r}") from None


@dataclass(frozen=True)
class SalesRecord:
    sales_enquiry_id: str
    attributes: Mapping[str, str]
    status: str

    def __post_init__(self):
        if self.status not in (WON, LOST):
            raise ValueError(f"status must be {WON!r} or {LOST!r}, got {self.status!r}")
        missing = [c for c in ATTRIBUTE_COLUMNS if c not in self.attributes]
        if missing:
            raise ValueError(f"record {self.sales_enquiry_id} lacks {missing}")
        object.__setattr__(self, "attributes", MappingProxyType(dict(self.attributes)))

    def __getitem__(self, column):
        if column == ID_COLUMN:
            return self.sales_enquiry_id
        if column == STATUS_COLUMN:
            return self.status
        return self.attributes[column]

    @property
    def won(self):
        return self.status == WON

    def as_row(self):
        return {c: self[c] for c in ALL_COLUMNS}


def ingest_csv(path):
    """Read a sales CSV into a list of :class:`SalesRecord`.

    Header names are matched against the dataset's short codes (or their
    descriptive names, case-insensitive). Columns outside the schema are
    ignored. When no id column is present, ids ``id-1001``, ``id-1002``, ...
    are assigned in row order. Row numbers in errors count data rows from 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path}: file is empty (no header row)") from None
        except csv.Error as exc:
            raise MalformedCsv(f"{path}: {exc}") from None

        positions = {}
        for pos, name in enumerate(header):
            col = _HEADER_LOOKUP.get(_canonical(name))
            if col is None:
                continue
            if col in positions:
                raise MalformedCsv(f"{path}: column {col} appears twice in header")
            positions[col] = pos
        for col in ATTRIBUTE_COLUMNS + (STATUS_COLUMN,):
            if col not in positions:
                raise MissingColumn(col)
        has_id = ID_COLUMN in positions

        records = []
        seen = set()
        try:
            for rowno, row in enumerate(reader, start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise MalformedCsv(
                        f"{path}: row {rowno} has {len(row)} fields, header has {len(header)}"
                    )
                values = {}
                for col, pos in positions.items():
                    cell = row[pos].strip()
                    if not cell:
                        raise EmptyCell(rowno, col)
                    values[col] = cell
                sid = values.pop(ID_COLUMN) if has_id else f"id-{1000 + len(records) + 1}"
                if sid in seen:
                    raise DuplicateId(sid, rowno)
                seen.add(sid)
                status = normalize_status(values.pop(STATUS_COLUMN))
                records.append(SalesRecord(sid, values, status))
        except csv.Error as exc:
            raise MalformedCsv(f"{path}: {exc}") from None
    return records


def write_csv(records, path):
    """Write records with the canonical header (inverse of :func:`ingest_csv`)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ALL_COLUMNS)
        for rec in records:
            writer.writerow([rec[c] for c in ALL_COLUMNS])
    return path
