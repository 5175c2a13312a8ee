#!/usr/bin/env python3
"""Record the frontend e2e fixtures from a real overfit checkpoint.

Trains the desk preset on strip-corrupted fixture sentences (or reuses
--checkpoint), serves it over the real HTTP service, and records the
request/response pairs the A9 editor flow needs: the noisy sentence check,
and the re-check of the text produced by accepting every top suggestion.
The tool fails if the checkpoint does not reproduce the clean sentence, so
a committed fixture is always a faithful recording.

Usage: python3 tools/make_ui_fixtures.py [--checkpoint PATH] [--out PATH]
"""

import argparse
import json
import sys
import tempfile
import threading
import urllib.request
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from vispell import errorgen as eg                      # noqa: E402
from vispell.model import load_checkpoint               # noqa: E402
from vispell.service import create_server               # noqa: E402
from vispell.textdata import detokenize, read_corrupted_jsonl  # noqa: E402
from vispell.train import overfit_harness               # noqa: E402


def get_json(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return resp.status, json.loads(resp.read())


def post_correct(base, text, top_k=3):
    req = urllib.request.Request(
        base + "/api/correct",
        data=json.dumps({"text": text, "top_k": top_k}, ensure_ascii=False).encode(),
        method="POST", headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--checkpoint", help="reuse an existing overfit checkpoint")
    parser.add_argument("--out", default=str(ROOT / "frontend" / "test" / "fixtures" / "e2e.json"))
    parser.add_argument("--max-steps", type=int, default=700)
    args = parser.parse_args()

    lines = (ROOT / "tests" / "fixtures" / "corpus_vi.txt").read_text("utf-8").splitlines()
    tmp = Path(tempfile.mkdtemp(prefix="vispell_ui_fixture_"))

    if args.checkpoint:
        ckpt_path = Path(args.checkpoint)
        corpus_path = ckpt_path.parent / "overfit_corpus.jsonl"
    else:
        spec = eg.CorruptionSpec(per_token_error_rate=0.05, clean_sentence_rate=0.25,
                                 full_strip_sentence_rate=0.55, rng_seed=5)
        print("training the overfit checkpoint (a few minutes on CPU)...")
        ckpt_path = overfit_harness(lines, tmp, corruption_spec=spec,
                                    n_sentences=200, max_steps=args.max_steps,
                                    lr=1e-3, seed=5)
        corpus_path = tmp / "overfit_corpus.jsonl"

    ckpt = load_checkpoint(ckpt_path)

    # pick a training sentence where full-strip produced several errors
    chosen = None
    for noisy, clean, mask in read_corrupted_jsonl(corpus_path):
        if sum(mask) >= 3 and noisy != clean and "," not in noisy:
            chosen = (noisy, clean, mask)
            break
    if chosen is None:
        raise SystemExit("no suitable corrupted sentence in the overfit corpus")
    noisy_tokens, clean_tokens, _ = chosen
    noisy_text = detokenize(noisy_tokens)
    clean_text = detokenize(clean_tokens)

    server = create_server(ckpt, host="127.0.0.1", port=0)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        _, health = get_json(base, "/api/health")
        noisy_resp = post_correct(base, noisy_text)

        # replay the accept-all flow the way the UI does: splice each top
        # suggestion over its span
        text = noisy_text
        for tok in sorted((t for t in noisy_resp["tokens"] if t["is_error"]),
                          key=lambda t: t["start"], reverse=True):
            if not tok["suggestions"]:
                raise SystemExit(f"flagged token {tok['token']!r} has no suggestions")
            text = text[:tok["start"]] + tok["suggestions"][0]["word"] + text[tok["end"]:]
        if text != clean_text:
            raise SystemExit(
                f"checkpoint is not good enough: accept-all gives {text!r}, "
                f"expected {clean_text!r}; train longer")

        clean_resp = post_correct(base, clean_text)
        if any(t["is_error"] for t in clean_resp["tokens"]):
            raise SystemExit("checkpoint still flags the corrected sentence; train longer")
    finally:
        server.shutdown()
        server.server_close()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({
        "model_version": ckpt.model_version,
        "health": health,
        "noisy_text": noisy_text,
        "clean_text": clean_text,
        "cases": [
            {"text": noisy_text, "top_k": 3, "response": noisy_resp},
            {"text": clean_text, "top_k": 3, "response": clean_resp},
        ],
    }, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    print(f"noisy: {noisy_text}")
    print(f"clean: {clean_text}")


if __name__ == "__main__":
    main()
