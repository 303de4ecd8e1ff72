"""MAP of one system over a grid of k_stat / k_lex expansion sizes."""

import argparse
from pathlib import Path

from cogqe.config import RunConfig
from cogqe.engine import QueryEngine, evaluate_systems
from cogqe.eval_harness import parse_qrels, parse_topics
from cogqe.retrieval import RoleWeights


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dir", default="benchmark")
    p.add_argument("--system", default="ILSS_IE1")
    p.add_argument("--values", default="0,1,3,5,10")
    args = p.parse_args()

    d = Path(args.dir)
    base = QueryEngine.from_config(RunConfig(corpus=str(d / "docs.trec"), kb=str(d / "kb.txt")))
    topics, qrels = parse_topics(d / "topics.txt"), parse_qrels(d / "qrels.txt")
    values = [int(v) for v in args.values.split(",")]
    print("k_stat,k_lex,map")
    for ks in values:
        for kl in values:
            engine = QueryEngine(base.index, base.model, base.kb, base.ncp_lexicon,
                                 base.smoothing, ks, kl)
            run = evaluate_systems(engine, [args.system], topics, qrels, RoleWeights())[args.system]
            print(f"{ks},{kl},{run.map:.4f}")


if __name__ == "__main__":
    main()
