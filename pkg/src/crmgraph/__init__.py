"""Graph-based sales-outcome analytics for B2B CRM data.

The pipeline ingests a sales CSV, builds a labeled property graph for
exploration and a sales-node projection for learning, extracts graph
features, trains a spectral GCN on two labeled nodes, and compares it with
tabular baselines.
"""

__version__ = "0.1.0"
