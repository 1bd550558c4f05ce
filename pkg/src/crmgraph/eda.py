"""Canned exploratory queries over records and graphs."""

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

from .errors import UnknownAttribute
from .store.inventory import degree_stats  # noqa: F401  (re-exported query)
from .store.records import ALL_COLUMNS, ID_COLUMN, LOST, WON


def count_by_label(graph):
    return graph.label_counts()


@dataclass(frozen=True)
class CrosstabResult:
    attribute: str
    rows: Tuple[Tuple[str, int, int], ...]  # (category, won, lost)

    @property
    def total(self):
        return sum(w + l for _, w, l in self.rows)

    def as_dict(self):
        return {cat: {"won": w, "lost": l} for cat, w, l in self.rows}

    def to_csv(self, path):
        return write_crosstabs([self], path)


def crosstab(records, attribute):
    """Won/Lost counts per category, largest categories first, ties by name."""
    if attribute not in ALL_COLUMNS or attribute == ID_COLUMN:
        raise UnknownAttribute(f"unknown attribute {attribute!r}")
    won = Counter(r[attribute] for r in records if r.status == WON)
    lost = Counter(r[attribute] for r in records if r.status == LOST)
    cats = set(won) | set(lost)
    ordered = sorted(cats, key=lambda c: (-(won[c] + lost[c]), c))
    return CrosstabResult(attribute, tuple((c, won[c], lost[c]) for c in ordered))


def write_crosstabs(results, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("attribute", "category", "won", "lost"))
        for res in results:
            for cat, w, l in res.rows:
                writer.writerow((res.attribute, cat, w, l))
    return path
