import csv
import json

import pandas as pd
import pytest

from sonder.cli import main
from sonder.ingestion import CorpusStore, QueryCorpus, SearchRecord


def seed_store(root, countries=("US",), n_queries=2, n_results=12,
               dates=("2022-01-01",)):
    store = CorpusStore(root)
    words = ["storm", "relief", "vote", "market", "river", "policy"]
    for country in countries:
        for date in dates:
            for q in range(n_queries):
                query = f"query {q} {country.lower()} {date}"
                records = tuple(
                    SearchRecord(
                        query=query, country=country, date=date,
                        rank=i, kind="web",
                        title=f"{words[(i + q) % len(words)]} piece {i}",
                        snippet=f"about {words[(i * 2) % len(words)]}",
                        url=f"https://s{i}.example.com/",
                    )
                    for i in range(1, n_results + 1)
                )
                store.store(QueryCorpus(key=records[0].key, records=records))
    return store


def test_ingest_and_curve(tmp_path, capsys):
    records = [
        {"query": "floods", "country": "US", "date": "2022-01-01",
         "rank": r, "kind": "web", "title": f"t{r}", "snippet": f"s{r}",
         "url": f"https://ex{r}.com/"}
        for r in (1, 2, 3)
    ]
    infile = tmp_path / "in.jsonl"
    infile.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    data = str(tmp_path / "store")
    assert main(["ingest", "--input", str(infile), "--data-dir", data]) == 0
    assert main(["curve", "floods", "--data-dir", data]) == 0
    out = capsys.readouterr().out
    assert "AUC" in out
    assert "0.0000" in out


def test_curve_single_result(tmp_path, capsys):
    store = CorpusStore(tmp_path / "store")
    rec = SearchRecord(query="solo", country="US", date="2022-01-01",
                       rank=1, kind="web", title="only", snippet="result",
                       url="https://one.example.com/")
    store.store(QueryCorpus(key=rec.key, records=(rec,)))
    assert main(["curve", "solo", "--data-dir", str(tmp_path / "store")]) == 0
    out = capsys.readouterr().out
    assert "AUC 1.000000" in out


def test_curve_missing_query(tmp_path, capsys):
    assert main(["curve", "nope", "--data-dir", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_rank_lambda_endpoints_differ(tmp_path, capsys):
    seed_store(tmp_path / "store")
    data = str(tmp_path / "store")
    query = "query 0 us 2022-01-01"
    assert main(["rank", query, "--lambda", "0", "--data-dir", data]) == 0
    rel_order = capsys.readouterr().out.splitlines()
    assert main(["rank", query, "--lambda", "1", "--data-dir", data]) == 0
    com_order = capsys.readouterr().out.splitlines()
    assert len(rel_order) == 12
    assert rel_order != com_order


def test_analyze_aggregate_and_curves(tmp_path):
    seed_store(tmp_path / "store", countries=("US", "IN"))
    out = tmp_path / "out"
    assert main(["analyze", "aggregate", "--input", str(tmp_path / "store"),
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "aggregates.csv").open()))
    assert {r["country"] for r in rows} == {"US", "IN"}
    assert all(r["queries"] == "2" for r in rows)

    assert main(["analyze", "curves", "--input", str(tmp_path / "store"),
                 "--out", str(out)]) == 0
    curve_rows = list(csv.DictReader((out / "region_curves.csv").open()))
    regions = {r["region"] for r in curve_rows}
    assert regions == {"North America", "South Asia"}


def test_analyze_regress(tmp_path):
    seed_store(tmp_path / "store", countries=("US", "CA", "IN", "PK"),
               n_queries=3,
               dates=("2022-01-01", "2022-01-02", "2022-01-03"))
    covs = tmp_path / "covs.csv"
    pd.DataFrame({
        "country": ["US", "CA", "IN", "PK"],
        "press_restriction": [20.0, 15.0, 45.0, 55.0],
    }).to_csv(covs, index=False)
    out = tmp_path / "out"
    assert main(["analyze", "regress", "--input", str(tmp_path / "store"),
                 "--covariates", str(covs), "--out", str(out)]) == 0
    assert (out / "regression.csv").exists()
    txt = (out / "regression.txt").read_text()
    assert "press_restriction" in txt
    assert "p<0.001" in txt


def test_simulate_writes_exports(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--n", "200", "--seed", "1",
                 "--out", str(out)]) == 0
    for name in ("participants.csv", "clicks.csv", "outcomes.csv",
                 "effects.csv"):
        assert (out / name).exists()
    effects = pd.read_csv(out / "effects.csv")
    assert "o2_max_rank" in set(effects["outcome"])
    outcomes = pd.read_csv(out / "outcomes.csv")
    assert len(outcomes) == 200


def test_unknown_subcommand_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
