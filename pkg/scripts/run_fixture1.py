#!/usr/bin/env python3
"""Compute the interaction metrics for the small two-field fixture and print them.

Expected: IDp 0.20, IDl 0.33, D 0.60, overall 0.53, m_cross 2, linkage 1.00/1.00.
"""

import json
import sys

from fieldlens import citegraph, corpus, idmetrics
from fieldlens.citegraph import FIELD_A, FIELD_B

RECORDS = [
    {"doi": "a1", "title": "A1", "fields": ["BE"], "references": ["b1", "c1"]},
    {"doi": "a2", "title": "A2", "fields": ["BE"], "references": ["a1"]},
    {"doi": "b1", "title": "B1", "fields": ["BE", "CS"], "references": ["c2"]},
    {"doi": "c1", "title": "C1", "fields": ["CS"], "references": ["b1"]},
    {"doi": "c2", "title": "C2", "fields": ["CS"], "references": ["a2"]},
]


def main() -> int:
    c = corpus.ingest_records(json.dumps(r) for r in RECORDS)
    a = citegraph.build_graph(c, FIELD_A)
    b = citegraph.build_graph(c, FIELD_B)
    m = citegraph.merge_graphs(a, b, c)
    r = idmetrics.compute_metrics(a, b, m)
    print(f"IDp      {r.idp:.4f}")
    print(f"IDl      {r.idl:.4f}")
    print(f"D        {r.dominance:.4f}")
    print(f"overall  {r.overall_strength:.4f}")
    print(f"m_cross  {r.m_cross}")
    print(f"linkage  {r.linkage_a_to_b:.2f} / {r.linkage_b_to_a:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
