"""Deterministic synthetic sales data with the real dataset's schema.

Used for demos, timing checks and end-to-end tests when the real CSV is
not at hand. Category vocabularies are illustrative; outcome odds lean on
a handful of attributes so that projections show class homophily.
"""

import numpy as np

from .store.records import ATTRIBUTE_COLUMNS, LOST, WON, SalesRecord

VOCABULARY = {
    "Product": tuple("ABCDEFGHIJKLMN"),
    "Seller": tuple(f"Seller {i}" for i in range(1, 19)),
    "Authority": ("High", "Low", "Mid"),
    "Comp_size": ("Big", "Mid", "Small"),
    "Competitors": ("No", "Unknown", "Yes"),
    "Purch_dept": ("No", "Unknown", "Yes"),
    "Partnership": ("No", "Yes"),
    "Budgt_alloc": ("No", "Unknown", "Yes"),
    "Forml_tend": ("No", "Yes"),
    "RFI": ("No", "Yes"),
    "RFP": ("No", "Yes"),
    "Growth": ("Decline", "Growth", "Stable", "Unknown"),
    "Posit_statm": ("Neutral", "No", "Yes"),
    "Source": ("Direct mail", "Fair", "Joint past", "Media", "Partner", "Phone", "Referral", "Website"),
    "Client": ("Current", "New", "Past"),
    "Scope": ("Clear", "Few questions", "Not clear"),
    "Strat_deal": ("Average important", "No importance", "Very important"),
    "Cross_sale": ("No", "Yes"),
    "Up_sale": ("No", "Yes"),
    "Deal_type": ("Consulting", "Maintenance", "Product", "Project", "Solution"),
    "Needs_def": ("Info gathering", "No", "Yes"),
    "Att_t_client": ("Arranged", "First deal", "Important", "Normal"),
}

# Additive log-odds toward Won for selected categories.
_LIFT = {
    ("Competitors", "No"): 1.0,
    ("Competitors", "Yes"): -0.6,
    ("Client", "Current"): 0.9,
    ("Client", "New"): -0.4,
    ("Up_sale", "Yes"): 0.8,
    ("Product", "B"): 0.7,
    ("Product", "D"): -0.3,
    ("Product", "G"): -1.5,
    ("Product", "J"): -1.5,
    ("Product", "K"): -1.5,
    ("Product", "L"): -1.5,
    ("Seller", "Seller 1"): 0.9,
    ("Seller", "Seller 2"): 0.5,
    ("Seller", "Seller 9"): 0.5,
    ("Posit_statm", "Yes"): 0.5,
    ("Needs_def", "Yes"): 0.4,
}


def _weights(k, skew):
    w = 1.0 / np.arange(1, k + 1) ** skew
    return w / w.sum()


def synthetic_records(n=448, n_won=227, seed=7):
    """``n`` records with exactly ``n_won`` Won outcomes, ids ``id-1001``..."""
    if not 0 < n_won < n:
        raise ValueError("need at least one record of each class")
    rng = np.random.default_rng(seed)
    columns = {}
    for col in ATTRIBUTE_COLUMNS:
        vocab = VOCABULARY[col]
        skew = 1.1 if col in ("Product", "Seller", "Source") else 0.6
        order = rng.permutation(len(vocab)) if col not in ("Product", "Seller") else np.arange(len(vocab))
        probs = _weights(len(vocab), skew)[np.argsort(order)]
        columns[col] = rng.choice(len(vocab), size=n, p=probs)
    score = rng.logistic(size=n)
    for (col, cat), lift in _LIFT.items():
        code = VOCABULARY[col].index(cat)
        score = score + lift * (columns[col] == code)
    won = np.zeros(n, dtype=bool)
    won[np.argsort(-score, kind="stable")[:n_won]] = True
    records = []
    for i in range(n):
        attrs = {col: VOCABULARY[col][columns[col][i]] for col in ATTRIBUTE_COLUMNS}
        records.append(SalesRecord(f"id-{1001 + i}", attrs, WON if won[i] else LOST))
    return records
