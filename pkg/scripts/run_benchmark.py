"""Evaluate every system on a collection and print the comparison CSV."""

import argparse
import time
from pathlib import Path

from cogqe.config import RunConfig
from cogqe.engine import SYSTEMS, QueryEngine, evaluate_systems, parse_weights
from cogqe.eval_harness import parse_qrels, parse_topics, report
from cogqe.retrieval import RoleWeights


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dir", default="benchmark", help="holds docs.trec, kb.txt, topics.txt, qrels.txt")
    p.add_argument("--systems", default=",".join(SYSTEMS))
    p.add_argument("--baselines", default="LM,RM")
    p.add_argument("--weights", help="e.g. CoI=1,DC=0.8,RC=0.5,EC=0.5")
    p.add_argument("--k-stat", type=int, default=5)
    p.add_argument("--k-lex", type=int, default=5)
    args = p.parse_args()

    d = Path(args.dir)
    cfg = RunConfig(corpus=str(d / "docs.trec"), kb=str(d / "kb.txt"),
                    k_stat=args.k_stat, k_lex=args.k_lex)
    t0 = time.perf_counter()
    engine = QueryEngine.from_config(cfg)
    topics, qrels = parse_topics(d / "topics.txt"), parse_qrels(d / "qrels.txt")
    weights = parse_weights(args.weights) if args.weights else RoleWeights()
    baselines = [s for s in args.baselines.split(",") if s]
    systems = [s for s in args.systems.split(",") if s and s not in baselines]
    runs = evaluate_systems(engine, baselines + systems, topics, qrels, weights)
    print(report([runs[s] for s in systems], [runs[s] for s in baselines]), end="")
    print(f"# {len(topics)} topics, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
