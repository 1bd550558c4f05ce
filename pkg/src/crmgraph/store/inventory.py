"""Database-style inventory statistics for either graph kind."""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

from .projection import GraphProjection
from .property_graph import PropertyGraph

PROJECTION_LABEL = "Sale"
PROJECTION_RELATIONSHIP = "IS_CONNECTED"


@dataclass(frozen=True)
class DegreeStats:
    min: int
    max: int
    mean: float  # rounded to 3 decimals

    def __str__(self):
        return f"{self.min}/{self.max}/{self.mean:.3f}"


@dataclass(frozen=True)
class InventoryStats:
    node_count: int
    label_count: int
    relationship_count: int
    relationship_type_count: int
    label_counts: Dict[str, int]
    degree: Optional[DegreeStats] = None

    def to_dict(self):
        return asdict(self)

    def summary(self):
        if self.degree is not None:
            return (f"nodes={self.node_count} edges={self.relationship_count}"
                    f" mean_degree={self.degree.mean:.3f}")
        return (f"nodes={self.node_count} labels={self.label_count}"
                f" relationships={self.relationship_count}"
                f" relationship_types={self.relationship_type_count}")


def degree_stats(projection):
    deg = projection.degrees
    if projection.n == 0:
        return DegreeStats(0, 0, 0.0)
    mean = 2 * len(projection.edges) / projection.n
    return DegreeStats(int(deg.min()), int(deg.max()), round(mean, 3))


def inventory(graph):
    if isinstance(graph, GraphProjection):
        return InventoryStats(
            node_count=graph.n,
            label_count=1 if graph.n else 0,
            relationship_count=len(graph.edges),
            relationship_type_count=1 if graph.edges else 0,
            label_counts={PROJECTION_LABEL: graph.n} if graph.n else {},
            degree=degree_stats(graph),
        )
    if isinstance(graph, PropertyGraph):
        return InventoryStats(
            node_count=len(graph.nodes),
            label_count=len(graph.labels()),
            relationship_count=len(graph.edges),
            relationship_type_count=len(graph.relationship_types()),
            label_counts=graph.label_counts(),
        )
    raise TypeError(f"cannot inventory {type(graph).__name__}")
