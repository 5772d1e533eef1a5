"""AUROC of the perturbation-free detectors across sampling temperatures."""

import argparse

from detectllm.backend import DecodingConfig, train_toy_lm
from detectllm.corpus import toy_corpus_split
from detectllm.datagen import build_pairs
from detectllm.evaluation import run_benchmark

METHODS = ("log_p", "rank", "log_rank", "entropy", "lrr")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--temperatures", default="0.5,0.6,0.7,0.8,0.9,1.0")
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    train, humans = toy_corpus_split(800, max(300, args.pairs), seed=args.seed)
    model = train_toy_lm(train, order=3, alpha=0.01)
    print("T     " + "".join(f"{m:>10}" for m in METHODS))
    for t in (float(x) for x in args.temperatures.split(",")):
        pairs = build_pairs(humans, model, DecodingConfig(temperature=t, seed=args.seed),
                            n_pairs=args.pairs, seed=args.seed)
        auc = run_benchmark(pairs, METHODS, model).auroc
        print(f"{t:<6.2f}" + "".join(f"{100 * auc[m]:>10.2f}" for m in METHODS))


if __name__ == "__main__":
    main()
