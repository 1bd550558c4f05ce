"""One-hot encoding of the categorical sales attributes."""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..errors import EmptyRecords
from ..store.records import ALL_COLUMNS, ID_COLUMN, STATUS_COLUMN

DEFAULT_EXCLUDED = frozenset({ID_COLUMN, STATUS_COLUMN})


@dataclass(frozen=True)
class OneHotEncoding:
    matrix: np.ndarray  # N x F, 0/1
    columns: Tuple[Tuple[str, str], ...]  # (source column, category) per output column
    categories: Dict[str, Tuple[str, ...]]

    @property
    def n_features(self):
        return len(self.columns)

    def column_names(self):
        return [f"{col}={cat}" for col, cat in self.columns]

    def transform(self, records):
        """Encode further records with the fitted categories; unseen values encode as all zeros."""
        out = np.zeros((len(records), len(self.columns)), dtype=np.uint8)
        pos = {c: k for k, c in enumerate(self.columns)}
        for i, rec in enumerate(records):
            for col in self.categories:
                k = pos.get((col, rec[col]))
                if k is not None:
                    out[i, k] = 1
        return out

    def decode(self, row):
        """Invert one encoded row back to ``{column: category}``."""
        hot = np.flatnonzero(np.asarray(row))
        return {self.columns[k][0]: self.columns[k][1] for k in hot}


def one_hot_encode(records, excluded=DEFAULT_EXCLUDED):
    """Return ``(encoding, labels)``, labels 1 for Won and 0 for Lost.

    Source columns follow dataset order; categories within a column are
    sorted lexicographically.
    """
    if not records:
        raise EmptyRecords("cannot encode zero records")
    sources = [c for c in ALL_COLUMNS if c not in excluded]
    categories = {c: tuple(sorted({r[c] for r in records})) for c in sources}
    columns = tuple((c, v) for c in sources for v in categories[c])
    enc = OneHotEncoding(np.zeros((0, len(columns)), dtype=np.uint8), columns, categories)
    enc = OneHotEncoding(enc.transform(records), columns, categories)
    labels = np.array([1 if r.won else 0 for r in records], dtype=int)
    return enc, labels
