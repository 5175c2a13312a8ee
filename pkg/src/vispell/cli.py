"""Command-line entry points: gen-data, train, eval, correct, serve.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal
error.  A single JSON config file with optional "corruption", "model" and
"train" sections feeds all commands; individual flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from pathlib import Path

from . import errorgen, evalmetrics
from .errorgen import CorruptionSpec, ErrorClass
from .model import desk_preset, load_checkpoint, paper_preset, predict
from .model.checkpoint import CheckpointError
from .model.config import ModelConfig
from .service import DEFAULT_MAX_BODY, create_server
from .textdata import CorpusError, read_corrupted_jsonl, read_wiki_testset
from .train import TrainConfig, paper_train_preset, predict_fn_from_checkpoint, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageExit(SystemExit):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageExit(EXIT_USAGE)


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorpusError(f"config {path}: top level must be an object")
    if "syllable_inventory" in obj:
        from . import syllable
        syllable.set_default_inventory(obj["syllable_inventory"])
    return obj


def _corruption_spec(config: dict, seed: int | None) -> CorruptionSpec:
    spec = CorruptionSpec.from_dict(config.get("corruption", {}))
    if seed is not None:
        spec.rng_seed = seed
    spec.validate()
    return spec


def _model_config(config: dict, preset: str) -> ModelConfig:
    section = dict(config.get("model", {}))
    v_word = section.pop("v_word", 8000)
    v_char = section.pop("v_char", 256)
    if preset == "paper":
        return paper_preset(**{"v_word": v_word, "v_char": v_char, **section})
    return desk_preset(v_word=v_word, v_char=v_char, **section)


def _train_config(config: dict, preset: str, args) -> TrainConfig:
    section = dict(config.get("train", {}))
    if preset == "paper":
        cfg = paper_train_preset(**section)
    else:
        cfg = TrainConfig.from_dict(section)
    if args.max_steps is not None:
        cfg.max_steps = args.max_steps
        cfg.total_steps = max(cfg.total_steps, args.max_steps) if section.get("total_steps") else args.max_steps
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Commands


def cmd_gen_data(args) -> int:
    config = load_config(args.config)
    spec = _corruption_spec(config, args.seed)
    stats: Counter = Counter()
    n_sentences = 0
    n_tokens = 0
    try:
        with open(args.input, encoding="utf-8") as src, \
                open(args.output, "w", encoding="utf-8") as dst:
            for sent in errorgen.stream_corpus(src, spec, max_tokens=args.max_tokens,
                                               stats=stats):
                dst.write(sent.to_json() + "\n")
                n_sentences += 1
                n_tokens += len(sent.noisy_tokens)
    except FileNotFoundError as exc:
        raise CorpusError(str(exc)) from exc
    print(f"wrote {n_sentences} sentences ({n_tokens} tokens) -> {args.output}")
    print("errors per class:")
    for cls in ErrorClass:
        print(f"  {cls.value:20s} {stats.get(cls, 0)}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_config(args.config)
    model_cfg = _model_config(config, args.preset)
    train_cfg = _train_config(config, args.preset, args)
    final = train(args.corpus, model_cfg, train_cfg, args.out,
                  resume_from=args.resume, quiet=False)
    print(f"final checkpoint: {final}")
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    predict_fn = predict_fn_from_checkpoint(ckpt, top_k=1)
    if args.testset:
        docs = read_wiki_testset(args.testset, strict=not args.lenient)
        report = evalmetrics.evaluate_testset(docs, predict_fn)
    else:
        triples = list(read_corrupted_jsonl(args.corpus))
        report = evalmetrics.evaluate_corpus(triples, predict_fn,
                                             word_vocab=ckpt.word_vocab)
    print(report.table())
    if args.json:
        Path(args.json).write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        print(f"report written to {args.json}")
    return EXIT_OK


def cmd_correct(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    text = args.text if args.text is not None else sys.stdin.read()
    preds = predict(text, ckpt.params, ckpt.config, ckpt.word_vocab,
                    ckpt.char_vocab, top_k=args.top_k)
    if args.json:
        out = [{
            "token": p.token, "is_error": p.is_error, "p_error": round(p.p_error, 6),
            "suggestions": [{"word": s.word, "prob": round(s.prob, 6)}
                            for s in p.suggestions],
        } for p in preds]
        print(json.dumps(out, ensure_ascii=False, indent=2))
        return EXIT_OK
    for p in preds:
        if p.is_error:
            sugg = ", ".join(f"{s.word} ({s.prob:.2f})" for s in p.suggestions)
            print(f"✗ {p.token}  (p_error {p.p_error:.2f})  -> {sugg}")
        else:
            print(f"  {p.token}")
    return EXIT_OK


def cmd_serve(args) -> int:
    host = os.environ.get("VISPELL_HOST", args.host)
    port = int(os.environ.get("VISPELL_PORT", args.port))
    server = create_server(args.checkpoint, host=host, port=port,
                           max_body=args.max_body, static_dir=args.static,
                           verbose=args.verbose)
    print(f"serving on http://{host}:{server.server_address[1]} "
          f"(checkpoint: {args.checkpoint})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="vispell",
                     description="Vietnamese spelling detection and correction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="corrupt a clean corpus into training triples")
    p.add_argument("--input", required=True, help="clean text, one sentence per line")
    p.add_argument("--output", required=True, help="output JSONL path")
    p.add_argument("--config", help="JSON config file (corruption section)")
    p.add_argument("--seed", type=int, help="override the corruption rng seed")
    p.add_argument("--max-tokens", type=int, default=192,
                   help="skip sentences longer than this many tokens")
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a corrupted corpus")
    p.add_argument("--corpus", required=True, help="corrupted corpus JSONL")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config file (model/train sections)")
    p.add_argument("--preset", choices=["desk", "paper"], default="desk")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--resume", help="checkpoint to resume from")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--testset", help="wiki spelling test set JSONL")
    group.add_argument("--corpus", help="corrupted corpus JSONL")
    p.add_argument("--lenient", action="store_true",
                   help="skip malformed test-set records instead of failing")
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("correct", help="correct a piece of text")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("text", nargs="?", help="text to check (stdin when omitted)")
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_correct)

    p = sub.add_parser("serve", help="run the HTTP correction service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8754)
    p.add_argument("--max-body", type=int, default=DEFAULT_MAX_BODY)
    p.add_argument("--static", help="directory of web UI files to serve at /")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageExit as exc:
        return int(exc.code)
    try:
        return args.fn(args)
    except (CorpusError, CheckpointError, ValueError) as exc:
        print(f"vispell: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"vispell: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"vispell: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
