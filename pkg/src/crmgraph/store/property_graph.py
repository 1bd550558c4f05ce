"""In-memory labeled property graph and the record-to-graph mapping."""

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from ..errors import EmptyRecords, InvalidMapping
from ..kvconfig import dump_kv, load_kv, parse_kv
from .records import ALL_COLUMNS


@dataclass
class Node:
    id: int
    label: str
    key: str
    attributes: dict


@dataclass
class Edge:
    source: int
    target: int
    type: str
    properties: dict


class PropertyGraph:
    """Nodes with a label, an external key and attributes; typed directed edges.

    Node ids are dense integers in insertion order. ``(label, key)`` is
    unique, so adding an existing pair merges into the stored node; the
    same holds for ``(source, target, type)`` edges. On merge, attribute
    values already present are kept.
    """

    def __init__(self):
        self.nodes = []
        self.edges = []
        self._by_key = {}
        self._edge_index = {}
        self._adjacent = defaultdict(set)

    def __len__(self):
        return len(self.nodes)

    def add_node(self, label, key, attributes=None):
        nid = self._by_key.get((label, key))
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(Node(nid, label, key, dict(attributes or {})))
            self._by_key[(label, key)] = nid
        elif attributes:
            stored = self.nodes[nid].attributes
            for k, v in attributes.items():
                stored.setdefault(k, v)
        return nid

    def add_edge(self, source, target, type, properties=None):
        if not (0 <= source < len(self.nodes) and 0 <= target < len(self.nodes)):
            raise IndexError(f"edge endpoint out of range: {source} -> {target}")
        triple = (source, target, type)
        idx = self._edge_index.get(triple)
        if idx is None:
            idx = len(self.edges)
            self.edges.append(Edge(source, target, type, dict(properties or {})))
            self._edge_index[triple] = idx
            self._adjacent[source].add(idx)
            self._adjacent[target].add(idx)
        elif properties:
            stored = self.edges[idx].properties
            for k, v in properties.items():
                stored.setdefault(k, v)
        return idx

    def find(self, label, key):
        return self._by_key.get((label, key))

    def nodes_with_label(self, label):
        return [n for n in self.nodes if n.label == label]

    def degree(self, node_id):
        return len(self._adjacent[node_id])

    def neighbors(self, node_id, type=None):
        """Ids of nodes sharing an edge with ``node_id``, either direction."""
        out = set()
        for idx in self._adjacent[node_id]:
            e = self.edges[idx]
            if type is not None and e.type != type:
                continue
            out.add(e.target if e.source == node_id else e.source)
        return sorted(out)

    def labels(self):
        return sorted({n.label for n in self.nodes})

    def relationship_types(self):
        return sorted({e.type for e in self.edges})

    def label_counts(self):
        return dict(sorted(Counter(n.label for n in self.nodes).items()))


_NODE_LABEL = "node_label"
_NODE_ATTR = "node_attribute_of"
_EDGE_PROP = "edge_property_of"
_REL_PREFIX = "rel."


@dataclass
class LabelMapping:
    """Which columns become nodes, node attributes or edge properties.

    ``labels`` maps label name to ``(key column, per_record)``; a
    per-record label gets one node per sale (keyed by the sale id) instead
    of one node per distinct value. ``relationships`` maps a relationship
    type to ``(from label, to label)``.

    Text form, one ``key = value`` per line::

        Product = node_label
        Status = node_label:SalesStatus
        Client = node_label:Client:per_record
        Comp_size = node_attribute_of:Client
        Competitors = edge_property_of:selling_to
        rel.selling_to = Sale -> Client
    """

    labels: dict = field(default_factory=dict)
    node_attributes: dict = field(default_factory=dict)
    edge_properties: dict = field(default_factory=dict)
    relationships: dict = field(default_factory=dict)

    def validate(self):
        known = set(ALL_COLUMNS)
        for label, (col, _) in self.labels.items():
            if col not in known:
                raise InvalidMapping(f"label {label!r} uses unknown column {col!r}")
        for col, label in self.node_attributes.items():
            if col not in known:
                raise InvalidMapping(f"unknown column {col!r}")
            if label not in self.labels:
                raise InvalidMapping(f"column {col!r} is an attribute of undefined label {label!r}")
        for col, rel in self.edge_properties.items():
            if col not in known:
                raise InvalidMapping(f"unknown column {col!r}")
            if rel not in self.relationships:
                raise InvalidMapping(f"column {col!r} is a property of undefined relationship {rel!r}")
        for rel, (a, b) in self.relationships.items():
            for lab in (a, b):
                if lab not in self.labels:
                    raise InvalidMapping(f"relationship {rel!r} references undefined label {lab!r}")
        return self

    @classmethod
    def from_pairs(cls, pairs):
        m = cls()
        for key, value in pairs.items():
            if key.startswith(_REL_PREFIX):
                rel = key[len(_REL_PREFIX):]
                ends = [s.strip() for s in value.split("->")]
                if not rel or len(ends) != 2 or not all(ends):
                    raise InvalidMapping(f"bad relationship definition {key} = {value}")
                m.relationships[rel] = (ends[0], ends[1])
                continue
            kind, _, rest = value.partition(":")
            kind = kind.strip()
            if kind == _NODE_LABEL:
                parts = [p.strip() for p in rest.split(":")] if rest else []
                label = parts[0] if parts and parts[0] else key
                flags = parts[1:]
                if any(f != "per_record" for f in flags):
                    raise InvalidMapping(f"unknown node_label flag in {key} = {value}")
                if label in m.labels:
                    raise InvalidMapping(f"label {label!r} defined twice")
                m.labels[label] = (key, "per_record" in flags)
            elif kind == _NODE_ATTR:
                m.node_attributes[key] = rest.strip()
            elif kind == _EDGE_PROP:
                m.edge_properties[key] = rest.strip()
            else:
                raise InvalidMapping(f"unknown mapping directive {value!r} for column {key!r}")
        return m.validate()

    @classmethod
    def parse(cls, text):
        return cls.from_pairs(parse_kv(text))

    @classmethod
    def load(cls, path):
        return cls.from_pairs(load_kv(path))

    def to_text(self):
        pairs = {}
        for label, (col, per_record) in self.labels.items():
            pairs[col] = f"{_NODE_LABEL}:{label}" + (":per_record" if per_record else "")
        for col, label in self.node_attributes.items():
            pairs[col] = f"{_NODE_ATTR}:{label}"
        for col, rel in self.edge_properties.items():
            pairs[col] = f"{_EDGE_PROP}:{rel}"
        for rel, (a, b) in self.relationships.items():
            pairs[_REL_PREFIX + rel] = f"{a} -> {b}"
        return dump_kv(pairs)


# Seven labels: five merged by value, Client and Authority one per sale.
DEFAULT_MAPPING_TEXT = """\
sales_enquiry_id = node_label:Sale
Product = node_label:Product
Seller = node_label:Seller
Source = node_label:Source
Status = node_label:SalesStatus
Client = node_label:Client:per_record
Authority = node_label:Authority:per_record

Forml_tend = node_attribute_of:Sale
RFI = node_attribute_of:Sale
RFP = node_attribute_of:Sale
Cross_sale = node_attribute_of:Sale
Up_sale = node_attribute_of:Sale
Partnership = node_attribute_of:Sale
Scope = node_attribute_of:Sale
Deal_type = node_attribute_of:Sale
Needs_def = node_attribute_of:Sale

Comp_size = node_attribute_of:Client
Budgt_alloc = node_attribute_of:Client
Growth = node_attribute_of:Client
Purch_dept = node_attribute_of:Client
Posit_statm = node_attribute_of:Client
Att_t_client = node_attribute_of:Client

Competitors = edge_property_of:selling_to
Strat_deal = edge_property_of:selling_to

rel.selling_to = Sale -> Client
rel.offers = Sale -> Product
rel.handled_by = Sale -> Seller
rel.enquired_via = Sale -> Source
rel.has_status = Sale -> SalesStatus
rel.has_authority = Client -> Authority
rel.manages = Seller -> Client
"""


def default_mapping():
    return LabelMapping.parse(DEFAULT_MAPPING_TEXT)


def _node_key(record, column, per_record):
    return record.sales_enquiry_id if per_record else record[column]


def ingest_records(graph, records, mapping):
    """Merge ``records`` into ``graph`` according to ``mapping``."""
    attrs_by_label = defaultdict(list)
    for col, label in mapping.node_attributes.items():
        attrs_by_label[label].append(col)
    props_by_rel = defaultdict(list)
    for col, rel in mapping.edge_properties.items():
        props_by_rel[rel].append(col)

    for rec in records:
        ids = {}
        for label, (col, per_record) in mapping.labels.items():
            attributes = {col: rec[col]}
            attributes.update((c, rec[c]) for c in attrs_by_label[label])
            ids[label] = graph.add_node(label, _node_key(rec, col, per_record), attributes)
        for rel, (a, b) in mapping.relationships.items():
            props = {c: rec[c] for c in props_by_rel[rel]}
            graph.add_edge(ids[a], ids[b], rel, props)
    return graph


def build_eda_graph(records, mapping=None):
    if not records:
        raise EmptyRecords("cannot build a graph from zero records")
    mapping = (mapping or default_mapping()).validate()
    return ingest_records(PropertyGraph(), records, mapping)
