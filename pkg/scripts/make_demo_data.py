#!/usr/bin/env python3
"""Generate a small demo dataset: a JSONL corpus of search results, a
participant roster, and a country covariates CSV, then ingest the corpus
into a store so the CLI and service can run against it.

Usage: python3 scripts/make_demo_data.py [--out demo_data]
"""

import argparse
import json
import random
from pathlib import Path

from sonder.ingestion import CorpusStore, ingest_jsonl
from sonder.service import hash_password

TOPICS = [
    "floods in pakistan",
    "war in ukraine",
    "iran protests",
    "climate change",
    "mikhail gorbachev",
]
COUNTRIES = {"US": 20.0, "CA": 15.0, "GB": 22.0, "IN": 45.0, "PK": 55.0,
             "BR": 40.0, "DE": 18.0, "NG": 50.0}
WORDS = ["relief", "crisis", "talks", "protest", "energy", "aid", "vote",
         "court", "border", "strike", "summit", "harvest", "rescue", "press"]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="demo_data")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    corpus_path = out / "results.jsonl"
    with corpus_path.open("w") as fh:
        for country in COUNTRIES:
            for query in TOPICS:
                for rank in range(1, 31):
                    words = rng.choices(WORDS, k=4)
                    fh.write(json.dumps({
                        "query": query, "country": country,
                        "date": "2022-09-01", "rank": rank, "kind": "web",
                        "title": f"{words[0]} {words[1]} report {rank}",
                        "snippet": f"{query} {words[2]} {words[3]}",
                        "url": f"https://{words[0]}{rank}.example.com/story",
                    }) + "\n")

    roster_path = out / "roster.csv"
    with roster_path.open("w") as fh:
        fh.write("id,password_hash\n")
        for i in range(20):
            fh.write(f"p-{i:03d},{hash_password(f'demo-{i:03d}')}\n")

    covs_path = out / "covariates.csv"
    with covs_path.open("w") as fh:
        fh.write("country,press_restriction\n")
        for country, score in COUNTRIES.items():
            fh.write(f"{country},{score}\n")

    store = CorpusStore(out / "store")
    count = ingest_jsonl(corpus_path, store, strict=True)
    print(f"wrote {corpus_path} ({count} records), {roster_path}, {covs_path}")
    print(f"ingested into {store.root}")
    print("try:")
    print(f"  sonder curve 'floods in pakistan' --country US "
          f"--data-dir {store.root}")
    print(f"  sonder analyze regress --input {store.root} "
          f"--covariates {covs_path} --out {out / 'analysis'}")
    print(f"  sonder serve --data-dir {store.root} --roster {roster_path}")
    print("demo passwords are demo-000 ... demo-019")


if __name__ == "__main__":
    main()
