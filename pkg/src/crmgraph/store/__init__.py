"""Sales ingestion, the EDA property graph and the GCN projection."""

from .inventory import DegreeStats, InventoryStats, degree_stats, inventory
from .projection import (
    ATTRIBUTES_NAME,
    CONNECTIVITY_ATTRIBUTES,
    EDGELIST_NAME,
    GraphProjection,
    ProjectionRule,
    build_gcn_graph,
    export_projection,
    import_edgelist,
)
from .property_graph import (
    DEFAULT_MAPPING_TEXT,
    LabelMapping,
    PropertyGraph,
    build_eda_graph,
    default_mapping,
    ingest_records,
)
from .records import (
    ALL_COLUMNS,
    ATTRIBUTE_COLUMNS,
    ID_COLUMN,
    LOST,
    STATUS_COLUMN,
    WON,
    SalesRecord,
    ingest_csv,
    write_csv,
)
