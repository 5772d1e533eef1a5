"""Regenerate the golden files under tests/golden/."""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from golden_recipes import BENCH_200, GOLDEN, NPR_PAIR, benchmark_200, npr_pair, toy_model_and_humans  # noqa: E402


def main():
    GOLDEN.mkdir(exist_ok=True)
    model, humans = toy_model_and_humans()
    NPR_PAIR.write_text(json.dumps(npr_pair(model, humans), indent=2, sort_keys=True) + "\n")
    report = benchmark_200(model, humans)
    obj = report.to_json()
    obj["scores"] = {m: {"machine": report.scores[m][0], "human": report.scores[m][1]} for m in report.methods}
    obj["ids"] = report.ids
    BENCH_200.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    print(json.dumps(obj["auroc"], indent=2))


if __name__ == "__main__":
    main()
