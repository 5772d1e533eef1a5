"""NPR and DetectGPT AUROC as the number of perturbations grows."""

import argparse

from detectllm.backend import DecodingConfig, train_toy_lm
from detectllm.corpus import toy_corpus_split
from detectllm.datagen import build_pairs
from detectllm.evaluation import run_benchmark
from detectllm.perturber import PerturbationConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="1,2,5,10,20")
    ap.add_argument("--pairs", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    train, humans = toy_corpus_split(800, max(300, args.pairs), seed=0)
    model = train_toy_lm(train, order=3, alpha=0.01)
    ns = [int(x) for x in args.ns.split(",")]
    print("seed  method     " + "".join(f"{'n=' + str(n):>9}" for n in ns))
    for seed in range(args.seeds):
        pairs = build_pairs(humans, model, DecodingConfig(seed=seed), n_pairs=args.pairs, seed=seed)
        rows = {"npr": [], "detect_gpt": []}
        for n in ns:
            auc = run_benchmark(pairs, rows, model, PerturbationConfig(n=n, seed=seed)).auroc
            for m in rows:
                rows[m].append(auc[m])
        for m, vals in rows.items():
            print(f"{seed:<6}{m:<11}" + "".join(f"{100 * v:>9.2f}" for v in vals))


if __name__ == "__main__":
    main()
