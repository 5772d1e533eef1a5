"""Command-line interface.

JSON results go to stdout, diagnostics to stderr. Exit codes: 0 success,
2 usage or input error, 3 backend or transport error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from detectllm.backend import DecodingConfig, HttpBackend, OfflineStats, ToyModel, score_text, train_toy_lm
from detectllm.backend.base import DEFAULT_MAX_SCORED
from detectllm.backend.http import ENV_URL
from detectllm.corpus import synthetic_documents
from detectllm.datagen import build_dataset, read_dataset, write_dataset
from detectllm.detectors import METHODS, PERTURBATION_METHODS, canonical_method, run_detector
from detectllm.errors import DetectLLMError
from detectllm.evaluation.benchmark import run_benchmark
from detectllm.evaluation.cost import MEASURED_TIMES, SCORING_TIMES, CostModel, cost_table, estimate_cost
from detectllm.perturber import PerturbationConfig, perturb

log = logging.getLogger("detectllm")

EXIT_OK, EXIT_USAGE, EXIT_BACKEND, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- shared argument groups ---------------------------------------------------

def _add_backend_args(p, offline=True):
    choices = ["toy", "http", "offline"] if offline else ["toy", "http"]
    g = p.add_argument_group("backend")
    g.add_argument("--backend", choices=choices, default="toy", help="scoring backend (default: toy)")
    g.add_argument("--model-file", help="toy n-gram model file (from train-toy)")
    g.add_argument("--url", help=f"HTTP backend URL (default: ${ENV_URL})")
    g.add_argument("--timeout", type=float, default=60.0, help="HTTP timeout in seconds")
    if offline:
        g.add_argument("--stats-file", help="stats-JSONL file for the offline backend")
        g.add_argument("--perturbed-stats", help="stats-JSONL of pre-perturbed texts (ids '<id>#<k>')")


def _add_perturb_args(p, default_n=None):
    g = p.add_argument_group("perturbation")
    g.add_argument("--perturbations", "--n", dest="perturbations", type=int, default=default_n,
                   help="number of perturbations per text")
    g.add_argument("--perturb-policy", choices=["lexical_local", "mask_fill_backend"], default="lexical_local")
    g.add_argument("--mask-fraction", type=float, default=0.15)
    g.add_argument("--span-length", type=int, default=2)
    g.add_argument("--perturb-url", help="mask-fill server URL (mask_fill_backend policy)")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="count", default=0)


def _make_backend(args):
    if args.backend == "toy":
        if not args.model_file:
            raise UsageError("--backend toy needs --model-file (create one with `train-toy`)")
        return ToyModel.load(args.model_file)
    if args.backend == "http":
        return HttpBackend(args.url, timeout=args.timeout)
    raise UsageError("this command cannot run on the offline backend")


def _perturb_config(args) -> PerturbationConfig:
    return PerturbationConfig(
        n=args.perturbations,
        mask_fraction=args.mask_fraction,
        span_length=args.span_length,
        policy=args.perturb_policy,
        seed=args.seed,
    )


def _perturb_backend(args, backend):
    if args.perturb_policy != "mask_fill_backend":
        return None
    if args.perturb_url or (args.backend != "http"):
        return HttpBackend(args.perturb_url, timeout=args.timeout)
    return backend


def _read_input(path) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


# -- commands -------------------------------------------------------------------

def cmd_score(args) -> int:
    method = canonical_method(args.method)
    needs_perturbed = method in PERTURBATION_METHODS
    if args.backend == "offline":
        if not args.stats_file or not args.id:
            raise UsageError("--backend offline needs --stats-file and --id")
        if needs_perturbed and not args.perturbed_stats:
            raise UsageError(
                f"method {method} on the offline backend needs pre-perturbed stats files: "
                "pass --perturbed-stats FILE (offline mode cannot generate perturbations)"
            )
        store = OfflineStats(args.stats_file, args.perturbed_stats)
        try:
            stats = store.get(args.id)
        except KeyError as exc:
            raise UsageError(str(exc)) from None
        perturbed = store.perturbations_of(args.id) if needs_perturbed else []
        if needs_perturbed:
            if args.perturbations is not None:
                if len(perturbed) < args.perturbations:
                    raise UsageError(f"only {len(perturbed)} perturbed records for {args.id!r}, "
                                     f"--perturbations asked for {args.perturbations}")
                perturbed = perturbed[: args.perturbations]
            if not perturbed:
                raise UsageError(f"no perturbed stats for id {args.id!r} in {args.perturbed_stats}")
    else:
        if needs_perturbed and args.perturbations is None:
            raise UsageError(f"method {method} needs a perturbation source: pass --perturbations N")
        backend = _make_backend(args)
        text = _read_input(args.input).strip()
        stats = score_text(text, backend, text_id=args.id or "input", max_scored=args.max_scored)
        perturbed = []
        if needs_perturbed:
            pset = perturb(text, _perturb_config(args), backend=_perturb_backend(args, backend),
                           text_id=stats.id)
            perturbed = [score_text(v, backend, text_id=f"{stats.id}#{k}", max_scored=args.max_scored)
                         for k, v in enumerate(pset.variants)]
    score = run_detector(method, stats, perturbed, normalize=args.normalize)
    _emit(score.to_json())
    return EXIT_OK


def cmd_perturb(args) -> int:
    backend = None
    if args.perturb_policy == "mask_fill_backend":
        backend = HttpBackend(args.perturb_url or args.url, timeout=args.timeout)
    text = _read_input(args.input).strip()
    pset = perturb(text, _perturb_config(args), backend=backend, text_id=args.id)
    _emit({"original_id": pset.original_id, "variants": list(pset.variants), "config": pset.config.to_json()})
    return EXIT_OK


def _decoding_config(args) -> DecodingConfig:
    if args.k is not None and args.decoding != "top_k":
        raise UsageError(f"--k is only valid with --decoding top_k (got --decoding {args.decoding})")
    if args.p is not None and args.decoding != "top_p":
        raise UsageError(f"--p is only valid with --decoding top_p (got --decoding {args.decoding})")
    k = args.k if args.decoding != "top_k" or args.k is not None else 40
    p = args.p if args.decoding != "top_p" or args.p is not None else 0.96
    return DecodingConfig(strategy=args.decoding, temperature=args.temperature, k=k, p=p,
                          seed=args.seed, greedy=args.greedy)


def _read_texts(path) -> list[str]:
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if path.suffix == ".jsonl":
        return [json.loads(ln)["text"] for ln in lines]
    return lines


def cmd_gen_dataset(args) -> int:
    cfg = _decoding_config(args)
    backend = _make_backend(args)
    texts = _read_texts(args.input)
    ds = build_dataset(texts, backend, cfg, prompt_tokens=args.prompt_tokens, n_pairs=args.pairs,
                       min_len=args.min_len, max_new_tokens=args.max_new_tokens, seed=args.seed,
                       workers=args.workers, source=str(args.input))
    write_dataset(ds, args.out)
    _emit({"out": str(args.out), "n_pairs": len(ds.pairs), "skipped": ds.metadata["skipped"]})
    return EXIT_OK


def cmd_benchmark(args) -> int:
    methods = [canonical_method(m) for m in args.methods.split(",") if m.strip()]
    pairs = read_dataset(args.dataset)
    if not pairs:
        raise UsageError(f"dataset {args.dataset} is empty")
    backend = _make_backend(args)
    pcfg = None
    if PERTURBATION_METHODS & set(methods):
        if args.perturbations is None:
            raise UsageError("perturbation-based methods need --perturbations N")
        pcfg = _perturb_config(args)
    report = run_benchmark(
        pairs, methods, backend, pcfg,
        perturb_backend=_perturb_backend(args, backend) if pcfg else None,
        workers=args.workers,
        score_prompt=args.score_prompt,
        normalize_detect_gpt=args.normalize,
        max_scored=args.max_scored,
        dataset_id=Path(args.dataset).name,
        record_timing=args.record_timing,
    )
    paths = report.write(args.out_dir, args.prefix)
    sys.stderr.write(report.table())
    _emit({"auroc": report.auroc, "advisory": report.advisory, "n_failed": report.n_failed,
           "files": {k: str(v) for k, v in paths.items()}})
    return EXIT_OK


def cmd_cost(args) -> int:
    if args.table:
        predicted = cost_table(t_p=args.t_p, n=args.n)
        _emit({"models": list(SCORING_TIMES), "predicted": predicted, "measured": MEASURED_TIMES})
        return EXIT_OK
    if args.method is None or args.t_m is None:
        raise UsageError("cost needs --method and --t-m (or --table)")
    method = canonical_method(args.method)
    cm = CostModel(t_p=args.t_p, t_m=args.t_m, n=args.n)
    seconds = round(estimate_cost(method, cm), 10)
    _emit({"method": method, "seconds": seconds, "t_p": cm.t_p, "t_m": cm.t_m, "n": cm.n})
    return EXIT_OK


def cmd_train_toy(args) -> int:
    if args.corpus:
        docs = _read_texts(args.corpus)
    else:
        docs = synthetic_documents(args.synthetic, seed=args.seed)
    model = train_toy_lm(docs, order=args.order, alpha=args.alpha, seed=args.seed)
    model.save(args.out)
    _emit({"out": str(args.out), "backend_id": model.backend_id, "vocab_size": model.vocab_size,
           "documents": len(docs)})
    return EXIT_OK


def cmd_serve_toy(args) -> int:
    from detectllm.backend.server import make_server

    server = make_server(ToyModel.load(args.model_file), args.host, args.port)
    host, port = server.server_address[:2]
    sys.stderr.write(f"serving on http://{host}:{port}\n")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detectllm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    method_help = f"one of {', '.join(METHODS)} (aliases: logp, logrank, detectgpt)"

    p = sub.add_parser("score", help="score one text with one detector")
    p.add_argument("--method", required=True, help=method_help)
    p.add_argument("--input", help="text file (default: stdin)")
    p.add_argument("--id", help="record id (required for the offline backend)")
    p.add_argument("--normalize", action="store_true", help="variance-normalise DetectGPT")
    p.add_argument("--max-scored", type=int, default=DEFAULT_MAX_SCORED)
    _add_backend_args(p)
    _add_perturb_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("perturb", help="write perturbations of one text")
    p.add_argument("--input", help="text file (default: stdin)")
    p.add_argument("--id", default="input")
    p.add_argument("--url", help=f"mask-fill server URL (default: ${ENV_URL})")
    p.add_argument("--timeout", type=float, default=60.0)
    _add_perturb_args(p, default_n=50)
    _add_common(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("gen-dataset", help="build a paired human/machine dataset")
    p.add_argument("--input", required=True, help="human texts: one per line, or .jsonl with a 'text' field")
    p.add_argument("--out", required=True, type=Path, help="dataset JSONL (metadata goes to <out>.meta.json)")
    p.add_argument("--prompt-tokens", type=int, default=30)
    p.add_argument("--pairs", type=int, default=300)
    p.add_argument("--min-len", type=int, default=50, help="minimum continuation length in tokens")
    p.add_argument("--max-new-tokens", type=int, default=100)
    p.add_argument("--decoding", choices=["temperature", "top_k", "top_p"], default="temperature")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--k", type=int, help="top-k cutoff (top_k only; default 40)")
    p.add_argument("--p", type=float, help="nucleus mass (top_p only; default 0.96)")
    p.add_argument("--greedy", action="store_true", help="argmax decoding (toy backend)")
    p.add_argument("--workers", type=int, default=1)
    _add_backend_args(p, offline=False)
    _add_common(p)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("benchmark", help="AUROC of detectors on a paired dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--methods", default=",".join(METHODS), help="comma-separated methods")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--prefix", default="report")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--score-prompt", action="store_true", help="also score the shared prompt tokens")
    p.add_argument("--normalize", action="store_true", help="variance-normalise DetectGPT")
    p.add_argument("--max-scored", type=int, default=DEFAULT_MAX_SCORED)
    p.add_argument("--record-timing", action="store_true",
                   help="add measured timings to the report (makes it non-reproducible)")
    _add_backend_args(p, offline=False)
    _add_perturb_args(p, default_n=50)
    _add_common(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("cost", help="estimated per-sample runtime of a detector")
    p.add_argument("--method", help=method_help)
    p.add_argument("--t-m", type=float, help="seconds to score one text")
    p.add_argument("--t-p", type=float, default=0.10, help="seconds per perturbation (default: T5-3b, 0.10)")
    p.add_argument("--n", type=int, default=50, help="number of perturbations")
    p.add_argument("--table", action="store_true", help="predict the full method x model table")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("train-toy", help="train the toy n-gram backend")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="training texts: one per line, or .jsonl with a 'text' field")
    src.add_argument("--synthetic", type=int, help="train on N synthetic documents")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--out", required=True, type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("serve-toy", help="serve a toy model over the HTTP backend protocol")
    p.add_argument("--model-file", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.set_defaults(func=cmd_serve_toy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"detectllm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DetectLLMError as exc:
        print(f"detectllm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError, OSError) as exc:
        print(f"detectllm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
