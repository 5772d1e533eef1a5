"""All seven detectors on the toy pipeline: train, build pairs, benchmark."""

import argparse
import logging

from detectllm.backend import DecodingConfig, train_toy_lm
from detectllm.corpus import toy_corpus_split
from detectllm.datagen import build_pairs
from detectllm.detectors import METHODS
from detectllm.evaluation import run_benchmark
from detectllm.perturber import PerturbationConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--perturbations", type=int, default=10)
    ap.add_argument("--temperature", type=float, default=1.0)
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default=None, help="also write report files here")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    train, humans = toy_corpus_split(800, max(300, args.pairs), seed=args.seed)
    model = train_toy_lm(train, order=3, alpha=args.alpha)
    pairs = build_pairs(humans, model, DecodingConfig(temperature=args.temperature, seed=args.seed),
                        n_pairs=args.pairs, seed=args.seed, workers=args.workers)
    report = run_benchmark(pairs, METHODS, model, PerturbationConfig(n=args.perturbations, seed=args.seed),
                           workers=args.workers, dataset_id=f"toy{args.pairs}", record_timing=True)
    print(report.table(), end="")
    for m, secs in report.timing["per_method_seconds"].items():
        print(f"  {m:<10} {1000 * secs:8.2f} ms/text")
    if args.out_dir:
        report.write(args.out_dir)


if __name__ == "__main__":
    main()
