#!/usr/bin/env python3
"""Regenerate the bundled 60-paper synthetic corpus and its config files.

The output is a pure function of --seed, so the committed demo data can be
rebuilt and diffed at any time.
"""

import argparse
import json
import random
from pathlib import Path

DEMO_DIR = Path(__file__).resolve().parents[1] / "src" / "fieldlens" / "data" / "demo"

TOPICS = {
    "BE": ["token", "governance", "incentive", "voting", "treasury", "market", "organization",
           "decentralized", "finance", "ownership", "coordination", "membership"],
    "CS": ["smart", "contract", "consensus", "protocol", "security", "verification", "ledger",
           "scalability", "vulnerability", "cryptographic", "oracle", "execution"],
}
JOURNALS = [("j-ledger", "Ledger Economics Review"), ("j-dist", "Journal of Distributed Systems"),
            ("j-org", "Organization Science Letters"), ("j-sec", "Computers and Security Quarterly")]
CONFERENCES = ["IEEE International Conference on Blockchain {y}",
               "ICBC {y} (IEEE)",
               "ACM Symposium on Decentralized Organizations {y}",
               "{o} IEEE Workshop on Token Engineering",
               "ACM Conference on Trust Protocols {y}",
               "International Workshop on Governance Mechanisms {y}"]
ORDINALS = ["1st", "2nd", "3rd", "4th"]
N_PAPERS = 60
N_EXTERNAL = 14


def make_papers(rng: random.Random) -> list[dict]:
    kinds = ["BE"] * 24 + ["CS"] * 24 + ["BOTH"] * 12
    rng.shuffle(kinds)
    authors = {f: [f"{f.lower()}-auth-{i:02d}" for i in range(12)] for f in ("BE", "CS")}
    external = [f"10.9000/ext.{i:03d}" for i in range(N_EXTERNAL)]
    papers = []
    for i, kind in enumerate(kinds):
        fields = ["BE", "CS"] if kind == "BOTH" else [kind]
        words = [w for f in fields for w in TOPICS[f]]
        title = " ".join(rng.sample(words, 4)).capitalize()
        year = 2017 + rng.randrange(7)
        pool = [a for f in fields for a in authors[f]]
        team = sorted(rng.sample(pool, rng.randint(1, 3)))
        if rng.random() < 0.45:
            vid, vname = rng.choice(JOURNALS)
            venue = {"id": vid, "name": vname, "kind": "journal"}
        else:
            name = rng.choice(CONFERENCES).format(y=year, o=rng.choice(ORDINALS))
            venue = {"id": f"conf-{i:02d}", "name": name, "kind": "conference"}
        abstract = None if rng.random() < 0.15 else (
            f"We study {' and '.join(rng.sample(words, 3))} in decentralized settings.")
        papers.append({
            "doi": f"10.5555/demo.{i:03d}",
            "title": title,
            "abstract": abstract,
            "year": year,
            "fields": fields,
            "authors": [{"id": a, "name": a.replace("-", " ").title()} for a in team],
            "venue": venue,
            "references": [],
            "source": "synthetic",
        })
    # citations point to older-or-equal papers, biased to the same field
    for i, p in enumerate(papers):
        same = [q["doi"] for j, q in enumerate(papers) if j != i and set(q["fields"]) & set(p["fields"])]
        other = [q["doi"] for j, q in enumerate(papers) if j != i and not set(q["fields"]) & set(p["fields"])]
        refs = set(rng.sample(same, min(len(same), rng.randint(1, 3))))
        if other and rng.random() < 0.35:
            refs.add(rng.choice(other))
        if len(p["fields"]) == 2 and rng.random() < 0.5:
            for f in ("BE", "CS"):
                refs.add(rng.choice([q["doi"] for q in papers if q["fields"] == [f]]))
        refs.update(rng.sample(external, rng.randint(0, 2)))
        p["references"] = sorted(refs)
    papers[7]["title"] = "Data Access Object patterns for ledger storage"
    return papers


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--out", type=Path, default=DEMO_DIR)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    papers = make_papers(rng)
    (out / "corpus.jsonl").write_text("".join(json.dumps(p, sort_keys=True) + "\n" for p in papers), encoding="utf-8")
    filters = [{"name": "dao-false-positive", "kind": "blocklist_regex", "field": "title",
                "pattern": "Data Access Object"}]
    (out / "filters.json").write_text(json.dumps(filters, indent=2) + "\n", encoding="utf-8")
    venues = {"same_series_patterns": {r"\bICBC\b|International Conference on Blockchain": "IEEE ICBC"},
              "group_threshold": 2, "group_labels": ["IEEE", "ACM"]}
    (out / "venues.json").write_text(json.dumps(venues, indent=2) + "\n", encoding="utf-8")
    (out / "label_map.csv").write_text("pattern,canonical\n(?i).*governance.*,Governance\n(?i).*contract.*,Smart contracts\n",
                                       encoding="utf-8")
    (out / "demo.cfg").write_text(
        "# Bundled synthetic demo. Paths are relative to this file.\n"
        f"seed = {args.seed % 1000}\n"
        "input = corpus.jsonl\n"
        "field_a_label = BE\nfield_b_label = CS\n"
        "filters = filters.json\n"
        "venue_rules = venues.json\n"
        "label_map = label_map.csv\n"
        "labeler_command = python -m fieldlens.labeler\n"
        "prune = fixpoint\n", encoding="utf-8")
    print(f"wrote demo data to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
