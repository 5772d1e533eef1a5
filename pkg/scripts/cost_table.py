"""Predicted vs measured per-sample seconds for every method and scoring model."""

import argparse

from detectllm.evaluation.cost import MEASURED_TIMES, PERTURBATION_TIMES, SCORING_TIMES, cost_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--perturber", choices=list(PERTURBATION_TIMES), default="T5-3b")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--tolerance", type=float, default=0.15)
    args = ap.parse_args()

    table = cost_table(PERTURBATION_TIMES[args.perturber], args.n)
    print(f"{'method':<11}" + "".join(f"{m:>18}" for m in SCORING_TIMES))
    misses = 0
    for method, row in table.items():
        cells = []
        for pred, meas in zip(row.values(), MEASURED_TIMES[method]):
            flag = "*" if abs(pred - meas) > args.tolerance + 1e-9 else " "
            misses += flag == "*"
            cells.append(f"{pred:7.2f} /{meas:6.2f}{flag}")
        print(f"{method:<11}" + "".join(f"{c:>18}" for c in cells))
    print(f"predicted / measured; * = off by more than {args.tolerance} s ({misses} cells)")


if __name__ == "__main__":
    main()
