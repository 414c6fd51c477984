"""Command-line entry points: ingest, curve, rank, analyze, simulate, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import completeness as comp
from .analytics import (
    ScoredQuery,
    aggregate,
    export_table,
    first_page_completeness,
    ols_fit,
    region_curves,
    COUNTRY_REGION,
)
from .embedding import EmbedderConfig, embed_batch, embed_text
from .errors import NotFound, SonderError
from .experiment import (
    ARM_TREATMENT,
    balance_table,
    compute_o2,
    estimate_effect,
    load_scale,
    score_survey,
)
from .ingestion import CorpusStore, ingest_jsonl
from .simulate import AgentBehavior, simulate_agents


def _resolve_key(store: CorpusStore, query: str, country: str | None,
                 date: str | None, kind: str | None):
    if country and date and kind:
        return (query, country, date, kind)
    matches = [k for k in sorted(store.keys()) if k[0] == query]
    if country:
        matches = [k for k in matches if k[1] == country]
    if date:
        matches = [k for k in matches if k[2] == date]
    if kind:
        matches = [k for k in matches if k[3] == kind]
    if not matches:
        raise NotFound(f"no stored corpus matches query {query!r}")
    return matches[0]


def _score_corpus(store: CorpusStore, key, config: EmbedderConfig):
    corpus = store.load(key)
    vectors = embed_batch(corpus.texts(), config)
    cvec = comp.build_corpus_vector(vectors)
    return corpus, vectors, cvec


def cmd_ingest(args) -> int:
    store = CorpusStore(args.data_dir)
    count = ingest_jsonl(args.input, store, strict=args.strict)
    print(f"ingested {count} records into {store.root}")
    return 0


def cmd_curve(args) -> int:
    store = CorpusStore(args.data_dir)
    key = _resolve_key(store, args.query, args.country, args.date, args.kind)
    _, vectors, cvec = _score_corpus(store, key, EmbedderConfig.from_env())
    curve = comp.completeness_curve(vectors, cvec)
    print(f"{'fraction':>10}  {'completeness':>12}")
    for fraction, value in curve.points:
        print(f"{fraction:>10.4f}  {value:>12.6f}")
    print(f"AUC {curve.auc:.6f}")
    return 0


def cmd_rank(args) -> int:
    store = CorpusStore(args.data_dir)
    key = _resolve_key(store, args.query, args.country, args.date, args.kind)
    config = EmbedderConfig.from_env()
    corpus, vectors, cvec = _score_corpus(store, key, config)
    query_vec = embed_text(args.query, config)
    lam = comp.Lambda(args.lam)
    scored = [
        comp.ScoredResult(
            record_id=rec.url,
            rank=rec.rank,
            relevance=comp.relevance(query_vec, vec),
            completeness=comp.result_completeness(vec, cvec),
            blended=0.0,
        )
        for rec, vec in zip(corpus.records, vectors)
    ]
    ranked = comp.rerank(scored, lam)
    for position, s in enumerate(ranked, start=1):
        rec = corpus.records[s.rank - 1]
        print(f"{position:>3}. [{s.blended:.4f}] (rel {s.relevance:.4f} "
              f"com {s.completeness:.4f}) {rec.title}")
    return 0


def _scored_queries(store: CorpusStore, config: EmbedderConfig,
                    page_size: int = 10):
    scored, curves = [], {}
    for key in sorted(store.keys()):
        query, country, date, kind = key
        _, vectors, cvec = _score_corpus(store, key, config)
        curve = comp.completeness_curve(vectors, cvec)
        corpus = store.load(key)
        scored.append(ScoredQuery(
            query=query, country=country, date=date,
            first_page_completeness=first_page_completeness(curve, page_size),
            volume=len(corpus.records),
        ))
        curves[key] = curve
    return scored, curves


def cmd_analyze(args) -> int:
    store = CorpusStore(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = EmbedderConfig.from_env()
    scored, curves = _scored_queries(store, config)

    if args.what == "aggregate":
        rows = aggregate(scored, group_by=("country", "date"))
        with (out / "aggregates.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["country", "region", "date", "mean_completeness",
                             "search_volume", "queries"])
            for r in rows:
                writer.writerow([r.country, r.region, r.date,
                                 f"{r.mean_completeness:.4f}",
                                 r.search_volume, r.queries])
        print(f"wrote {out / 'aggregates.csv'} ({len(rows)} rows)")
        return 0

    if args.what == "regress":
        covs = pd.read_csv(args.covariates)
        rows = aggregate(scored, group_by=("country", "date"))
        frame = pd.DataFrame([{
            "country": r.country, "region": r.region, "date": r.date,
            "completeness": r.mean_completeness,
            "search_volume": r.search_volume,
        } for r in rows]).merge(covs, on="country", how="inner")
        if frame.empty:
            raise NotFound("no overlap between store and covariates CSV")
        extra = [c for c in ("search_volume", "gdp_per_capita", "population")
                 if c in frame.columns and frame[c].nunique() > 1]
        fits = [ols_fit(frame, "completeness", ["press_restriction"],
                        standardize=["press_restriction"])]
        if extra:
            fits.append(ols_fit(
                frame, "completeness", ["press_restriction", *extra],
                standardize=["press_restriction", *extra]))
        if frame["region"].nunique() > 1:
            fits.append(ols_fit(
                frame, "completeness", ["press_restriction", *extra],
                fixed_effects=["region"],
                standardize=["press_restriction", *extra]))
        csv_text, txt = export_table(fits, skip_prefixes=("region_",))
        (out / "regression.csv").write_text(csv_text)
        (out / "regression.txt").write_text(txt)
        print(txt)
        return 0

    if args.what == "curves":
        by_region: dict[str, list] = {}
        for key, curve in curves.items():
            region = COUNTRY_REGION.get(key[1])
            if region:
                by_region.setdefault(region, []).append(curve)
        results = region_curves(by_region)
        with (out / "region_curves.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["region", "fraction", "completeness", "auc"])
            for region, curve in results:
                for fraction, value in curve.points:
                    writer.writerow([region, f"{fraction:.2f}",
                                     f"{value:.6f}", f"{curve.auc:.6f}"])
        print(f"wrote {out / 'region_curves.csv'} ({len(results)} regions)")
        return 0

    raise SonderError(f"unknown analyze action {args.what!r}")


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cohort = simulate_agents(args.n, AgentBehavior(), seed=args.seed)
    scale = load_scale("aot17")

    participants_df = pd.DataFrame([{
        "id": p.id, "arm": p.arm, "aot7_pre": p.aot7_pre, **p.covariates,
    } for p in cohort.participants])
    participants_df.to_csv(out / "participants.csv", index=False)

    clicks_df = pd.DataFrame([{
        "participant_id": c.participant_id, "topic": c.topic,
        "query": c.query, "rank_clicked": c.rank_clicked,
        "completeness_of_result": c.completeness_of_result,
    } for c in cohort.clicks])
    clicks_df.to_csv(out / "clicks.csv", index=False)

    by_pid: dict[str, list] = {}
    for c in cohort.clicks:
        by_pid.setdefault(c.participant_id, []).append(c)
    survey_by_pid = {s.participant_id: s for s in cohort.surveys}
    outcome_rows = []
    for p in cohort.participants:
        max_rank, n_clicked, mean_comp = compute_o2(by_pid.get(p.id, []))
        scores = score_survey(survey_by_pid[p.id], scale)
        outcome_rows.append({
            "participant_id": p.id, "arm": p.arm,
            "o1_overall": scores["overall"],
            **{f"o1_{d}": v for d, v in scores["by_dimension"].items()},
            "o2_max_rank": max_rank, "o2_n_clicked": n_clicked,
            "o2_mean_click_completeness": mean_comp,
        })
    outcomes_df = pd.DataFrame(outcome_rows)
    outcomes_df.to_csv(out / "outcomes.csv", index=False)

    arms = outcomes_df["arm"].tolist()
    effects = []
    for name, standardized in (("o2_max_rank", False),
                               ("o2_n_clicked", False),
                               ("o2_mean_click_completeness", False),
                               ("o1_overall", True),
                               ("o1_fact_resistance", True),
                               ("o1_dogmatism", True),
                               ("o1_liberalism", True),
                               ("o1_belief_personification", True)):
        fit = estimate_effect(outcomes_df[name].tolist(), arms,
                              standardize_outcome=standardized)
        effects.append({
            "outcome": name,
            "beta_treatment": fit.coef("treatment"),
            "se": fit.se("treatment"),
            "p_value": fit.p_values["treatment"],
            "n": fit.n_obs,
            "standardized": standardized,
        })
    pd.DataFrame(effects).to_csv(out / "effects.csv", index=False)

    print("balance:")
    for row in balance_table(cohort.participants):
        print(f"  {row['covariate']:<12} diff {row['diff']:+.3f} "
              f"(se {row['se']:.3f}){row['stars']}")
    print("effects:")
    for e in effects:
        print(f"  {e['outcome']:<28} beta {e['beta_treatment']:+.3f} "
              f"(se {e['se']:.3f}, p {e['p_value']:.3f})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_env()
    if args.data_dir:
        config.data_dir = args.data_dir
    if args.roster:
        config.roster_path = args.roster
    if args.frontend:
        config.frontend_dir = args.frontend
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sonder")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a JSONL file of search records")
    p.add_argument("--input", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("curve", help="print the completeness curve for a query")
    p.add_argument("query")
    p.add_argument("--country")
    p.add_argument("--date")
    p.add_argument("--kind")
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("rank", help="re-rank a stored corpus by blended score")
    p.add_argument("query")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--country")
    p.add_argument("--date")
    p.add_argument("--kind")
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("analyze", help="aggregate, regress, or export curves")
    p.add_argument("what", choices=["aggregate", "regress", "curves"])
    p.add_argument("--input", required=True, help="corpus store root")
    p.add_argument("--covariates", help="country covariates CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run the simulated-agent experiment")
    p.add_argument("--n", type=int, default=876)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--roster", default=None)
    p.add_argument("--frontend", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SonderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
