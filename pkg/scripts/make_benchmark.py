"""Regenerate the shipped synthetic benchmark (docs, KB, topics, qrels)."""

import argparse

from cogqe.benchmark import DEFAULT_SEED, DEFAULT_TOPICS, generate


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="benchmark")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--topics", type=int, default=DEFAULT_TOPICS)
    args = p.parse_args()
    bench = generate(args.seed, args.topics)
    bench.write(args.out)
    print(f"wrote {len(bench.docs)} documents and {len(bench.topics)} topics to {args.out}")


if __name__ == "__main__":
    main()
