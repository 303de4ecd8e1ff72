"""Command-line driver: index -> expand -> search -> evaluate -> tune.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import RunConfig, load_config
from .corpus_index import ConfigError, build_ngram_model, ingest, load_index, save_index
from .engine import ILSS_SYSTEMS, SYSTEMS, QueryEngine, parse_weights
from .eval_harness import Topic, evaluate_run, parse_qrels, parse_topics, report
from .expansion import Pattern
from .ga_tuner import EvalContext, GAConfig, evolve, evolve_per_topic
from .linguistics import analyze_preparsed, load_preparsed
from .retrieval import RoleWeights, format_run, parse_run
from .text import make_pipeline

log = logging.getLogger("cogqe")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _write(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("corpus", "index", "kb", "ncp", "stopwords", "ngram", "topics", "queries", "qrels", "pattern",
            "weights", "weights_file", "k", "k_stat", "k_lex", "mu", "window", "seed",
            "population", "iterations", "patience")
    out = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _config(args: argparse.Namespace) -> RunConfig:
    return load_config(args.config, _overrides(args))


def _engine(cfg: RunConfig) -> QueryEngine:
    """Prefer a saved index; fall back to indexing the corpus in memory."""
    cfg.check_optional("kb", "ncp", "stopwords", "ngram")
    if cfg.index and Path(cfg.index).is_file():
        index, model = load_index(cfg.index)
        return QueryEngine.from_config(cfg, index, model)
    cfg.require("corpus")
    return QueryEngine.from_config(cfg)


def _weights(cfg: RunConfig) -> RoleWeights:
    if cfg.weights_file:
        cfg.require("weights_file")
        return RoleWeights.load(cfg.weights_file)
    if cfg.weights:
        try:
            return parse_weights(cfg.weights)
        except ValueError as e:
            raise ConfigError(f"weights: {e}") from None
    return RoleWeights()


def _topics(cfg: RunConfig, query: str | None = None) -> list[Topic]:
    if query:
        return [Topic("1", query)]
    cfg.require("topics")
    return parse_topics(cfg.topics)


# -- commands --------------------------------------------------------------------------


def cmd_index(cfg: RunConfig, output: str | None) -> int:
    cfg.require("corpus")
    cfg.check_optional("stopwords")
    out = output or cfg.index
    if not out:
        raise ConfigError("no index output path (use --output or set 'index')")
    index = ingest(cfg.corpus, make_pipeline(cfg.stopwords, cfg.stemming), cfg.corpus_format)
    for err in index.errors:
        log.warning("skipped: %s", err)
    model = build_ngram_model(index, cfg.window)
    save_index(index, model, out)
    log.info("indexed %d documents (%d tokens) -> %s", index.doc_count, index.total_tokens, out)
    return EXIT_OK


def cmd_expand(cfg: RunConfig, query: str | None, output: str | None) -> int:
    engine = _engine(cfg)
    pattern = Pattern.parse(cfg.pattern)
    text = "".join(engine.audit(t.title, pattern, t.number if not query else None)
                   for t in _topics(cfg, query))
    _write(text, output)
    return EXIT_OK


def _system_for(cfg: RunConfig, system: str | None) -> str:
    if system:
        if system not in SYSTEMS:
            raise ConfigError(f"unknown system {system!r}")
        return system
    pattern = Pattern.parse(cfg.pattern)
    return "CRM" if pattern is Pattern.NONE else f"ILSS_{pattern.value}"


def cmd_search(cfg: RunConfig, query: str | None, system: str | None, tag: str | None,
               output: str | None) -> int:
    engine = _engine(cfg)
    weights = _weights(cfg)
    system = _system_for(cfg, system)
    lines = []
    for topic in _topics(cfg, query):
        results = engine.run_system(system, topic.title, weights, cfg.k)
        if not results:
            log.warning("topic %s: no candidate documents", topic.number)
        lines.extend(format_run(topic.number, results, tag or system))
    _write("".join(line + "\n" for line in lines), output)
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, runs: Sequence[str], baselines: Sequence[str],
                 output: str | None) -> int:
    cfg.require("qrels")
    for p in list(runs) + list(baselines):
        if not Path(p).is_file():
            raise ConfigError(f"run file {p} does not exist")
    qrels = parse_qrels(cfg.qrels)

    def load(path: str):
        tag, rankings = parse_run(Path(path).read_text(encoding="utf-8"))
        return evaluate_run(tag or Path(path).stem, rankings, qrels, cfg.k)

    base_runs = [load(p) for p in baselines]
    sys_runs = [load(p) for p in runs]
    _write(report(sys_runs, base_runs), output)
    return EXIT_OK


def _ga_config(cfg: RunConfig) -> GAConfig:
    try:
        return GAConfig(population_size=cfg.population, max_iterations=cfg.iterations,
                        crossover_events=cfg.crossover_events,
                        mutation_events=cfg.mutation_events, patience=cfg.patience,
                        rng_seed=cfg.seed)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def cmd_tune(cfg: RunConfig, system: str | None, output: str | None,
             report_path: str | None) -> int:
    cfg.require("qrels")
    ga_cfg = _ga_config(cfg)
    engine = _engine(cfg)
    system = _system_for(cfg, system)
    if system in ("LM", "RM"):
        raise ConfigError(f"{system} has no role weights to tune")
    qrels = parse_qrels(cfg.qrels)
    if cfg.queries:
        cfg.require("queries")
        queries = {p.qid: analyze_preparsed(p, pipeline=engine.pipeline, kb=engine.kb,
                                            stats=engine.index)
                   for p in load_preparsed(cfg.queries)}
    else:
        queries = {t.number: engine.system_query(system, t.title) for t in _topics(cfg)}
    ctx = EvalContext.build(queries, qrels, engine.index, engine.smoothing, cfg.k)
    out = output or cfg.weights_file or "weights.txt"
    if cfg.per_query:
        results = evolve_per_topic(ga_cfg, ctx)
        Path(out).mkdir(parents=True, exist_ok=True)
        for topic, res in results.items():
            res.weights.save(Path(out) / f"{topic}.weights")
        text = "".join(f"# topic {t}\n{r.report()}" for t, r in results.items())
    else:
        result = evolve(ga_cfg, ctx)
        result.weights.save(out)
        text = result.report()
        log.info("best MAP %.6f -> %s", result.best_fitness, out)
    if report_path:
        _write(text, report_path)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any configuration key")
    common.add_argument("--corpus")
    common.add_argument("--index")
    common.add_argument("--kb")
    common.add_argument("--ncp")
    common.add_argument("--stopwords")
    common.add_argument("--ngram")
    common.add_argument("--window", type=int)
    common.add_argument("--mu", type=float)
    common.add_argument("-o", "--output")

    p = argparse.ArgumentParser(prog="cogqe", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("index", parents=[common], help="build and save the index")

    query_opts = argparse.ArgumentParser(add_help=False)
    query_opts.add_argument("--query", help="single query text instead of a topics file")
    query_opts.add_argument("--topics")
    query_opts.add_argument("--pattern", help="IE1 | IE2 | IE3 | IE4 | none")
    query_opts.add_argument("--k-stat", dest="k_stat", type=int)
    query_opts.add_argument("--k-lex", dest="k_lex", type=int)

    sub.add_parser("expand", parents=[common, query_opts], help="print the expansion audit")

    s = sub.add_parser("search", parents=[common, query_opts], help="write a TREC run")
    s.add_argument("--system", help=f"one of {', '.join(SYSTEMS)} (default from --pattern)")
    s.add_argument("--weights", help="e.g. CoI=1,DC=0.8,RC=0.5,EC=0.5")
    s.add_argument("--weights-file", dest="weights_file")
    s.add_argument("-k", type=int, dest="k", help="result depth")
    s.add_argument("--tag")

    e = sub.add_parser("evaluate", parents=[common], help="MAP / significance report")
    e.add_argument("runs", nargs="+")
    e.add_argument("--baseline", action="append", default=[])
    e.add_argument("--qrels")
    e.add_argument("-k", type=int, dest="k", help="evaluation depth")

    t = sub.add_parser("tune", parents=[common, query_opts], help="evolve role weights")
    t.add_argument("--qrels")
    t.add_argument("--queries", help="pre-parsed queries (tagged tokens and roles)")
    t.add_argument("--system", help=f"one of {', '.join(s for s in SYSTEMS if s not in ('LM', 'RM'))}")
    t.add_argument("--population", type=int)
    t.add_argument("--iterations", type=int)
    t.add_argument("--patience", type=int)
    t.add_argument("--per-query", dest="per_query", action="store_true")
    t.add_argument("--report", help="tuning report path")
    t.add_argument("-k", type=int, dest="k", help="evaluation depth")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if getattr(args, "per_query", False):
            cfg = cfg.replace(per_query=True)
        if args.command == "index":
            return cmd_index(cfg, args.output)
        if args.command == "expand":
            return cmd_expand(cfg, args.query, args.output)
        if args.command == "search":
            return cmd_search(cfg, args.query, args.system, args.tag, args.output)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.runs, args.baseline, args.output)
        if args.command == "tune":
            return cmd_tune(cfg, args.system, args.output, args.report)
    except ConfigError as e:
        print(f"cogqe: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # runtime failures map to exit code 1
        log.debug("failure", exc_info=True)
        print(f"cogqe: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
