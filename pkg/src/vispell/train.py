"""Optimizers, poly-decay schedule, training loop and checkpointing.

Batch order and dropout noise are derived statelessly from (seed, step), so
resuming from a checkpoint replays the exact trajectory of an uninterrupted
run.  Adam is the default; LAMB is implemented for the large-batch preset.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import evalmetrics
from .model import ModelConfig, init_params, loss_and_grads, predict_tokens
from .model.checkpoint import load_checkpoint, save_checkpoint
from .textdata import Vocab, build_vocab, encode, read_corrupted_jsonl


class TrainingAborted(RuntimeError):
    """Raised when the loss goes non-finite; carries step and batch digest."""


@dataclass
class PolyDecaySchedule:
    lr: float
    total_steps: int
    power: float = 1.0
    warmup_steps: int = 0


def lr_at(step: int, schedule: PolyDecaySchedule) -> float:
    """Linear warmup to lr, then lr * (1 - progress)^power, floored at 0."""
    if step < 0:
        raise ValueError("step must be >= 0")
    if schedule.warmup_steps > 0 and step < schedule.warmup_steps:
        return schedule.lr * (step + 1) / schedule.warmup_steps
    span = max(1, schedule.total_steps - schedule.warmup_steps)
    remaining = 1.0 - (step - schedule.warmup_steps) / span
    return schedule.lr * max(0.0, remaining) ** schedule.power


@dataclass
class TrainConfig:
    optimizer: str = "adam"           # adam | lamb
    lr: float = 3e-4
    power: float = 1.0
    total_steps: int = 3000
    warmup_steps: Optional[int] = None  # None -> 1% of total
    batch_size: int = 32
    max_steps: int = 3000
    seed: int = 0
    checkpoint_every: int = 0           # 0 -> final checkpoint only
    eval_every: int = 0                 # 0 -> never
    log_every: int = 50
    weight_decay: float = 0.01
    clip_norm: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.optimizer not in ("adam", "lamb"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.power <= 0:
            raise ValueError("poly decay power must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")

    def schedule(self) -> PolyDecaySchedule:
        warmup = self.warmup_steps
        if warmup is None:
            warmup = self.total_steps // 100
        return PolyDecaySchedule(self.lr, self.total_steps, self.power, warmup)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        cfg = cls(**obj)
        cfg.validate()
        return cfg


def paper_train_preset(**overrides) -> TrainConfig:
    """LAMB, lr 1.76e-3, poly power 1.0, 500k steps, batch 512."""
    cfg = TrainConfig(optimizer="lamb", lr=1.76e-3, power=1.0,
                      total_steps=500_000, max_steps=500_000, batch_size=512)
    for key, val in overrides.items():
        setattr(cfg, key, val)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Optimizer


def _decays(name: str, tensor: np.ndarray) -> bool:
    # biases and norm scales are exempt from weight decay
    return tensor.ndim >= 2


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = float(np.sqrt(sum(float((g ** 2).sum()) for g in grads.values())))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for name in grads:
            grads[name] = grads[name] * scale
    return total


def optimizer_update(params, grads, m, v, step: int, lr: float,
                     cfg: TrainConfig) -> None:
    """One Adam/LAMB update in place; ``step`` is 1-based for bias correction."""
    b1, b2 = cfg.beta1, cfg.beta2
    bc1 = 1.0 - b1 ** step
    bc2 = 1.0 - b2 ** step
    for name, p in params.items():
        g = grads[name]
        m[name] = b1 * m[name] + (1 - b1) * g
        v[name] = b2 * v[name] + (1 - b2) * (g * g)
        mhat = m[name] / bc1
        vhat = v[name] / bc2
        update = mhat / (np.sqrt(vhat) + cfg.eps)
        if cfg.weight_decay > 0 and _decays(name, p):
            update = update + cfg.weight_decay * p
        if cfg.optimizer == "lamb":
            w_norm = float(np.sqrt((p ** 2).sum()))
            u_norm = float(np.sqrt((update ** 2).sum()))
            trust = w_norm / u_norm if w_norm > 0 and u_norm > 0 else 1.0
            update = trust * update
        p -= (lr * update).astype(p.dtype)


# ---------------------------------------------------------------------------
# Train state


@dataclass
class TrainState:
    step: int
    params: dict[str, np.ndarray]
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    model_config: ModelConfig
    train_config: TrainConfig
    loss_sum: float = 0.0
    detect_loss_sum: float = 0.0
    correct_loss_sum: float = 0.0
    loss_count: int = 0

    def running_means(self) -> dict[str, float]:
        n = max(1, self.loss_count)
        return {
            "loss": self.loss_sum / n,
            "detect_loss": self.detect_loss_sum / n,
            "correct_loss": self.correct_loss_sum / n,
        }

    def reset_running(self) -> None:
        self.loss_sum = self.detect_loss_sum = self.correct_loss_sum = 0.0
        self.loss_count = 0


def init_state(model_cfg: ModelConfig, train_cfg: TrainConfig,
               dtype=np.float32) -> TrainState:
    train_cfg.validate()
    params = init_params(model_cfg, seed=train_cfg.seed, dtype=dtype)
    m = {k: np.zeros_like(p) for k, p in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    return TrainState(0, params, m, v, model_cfg, train_cfg)


def _batch_digest(word_ids: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(word_ids).tobytes()).hexdigest()[:12]


def step(state: TrainState, batch: dict[str, np.ndarray]) -> TrainState:
    """Forward, loss, backward, one optimizer update; mutates ``state``.

    ``batch`` holds word_ids, char_ids, attn_mask, detect_labels and
    correct_labels stacked along the first axis.
    """
    rng = np.random.default_rng([state.train_config.seed, 7919, state.step])
    parts, grads = loss_and_grads(
        state.params, state.model_config,
        batch["word_ids"], batch["char_ids"], batch["attn_mask"],
        batch["detect_labels"], batch["correct_labels"],
        train=True, rng=rng,
    )
    if not np.isfinite(parts.total):
        raise TrainingAborted(
            f"non-finite loss {parts.total!r} at step {state.step} "
            f"(batch digest {_batch_digest(batch['word_ids'])})")
    clip_global_norm(grads, state.train_config.clip_norm)
    lr = lr_at(state.step, state.train_config.schedule())
    optimizer_update(state.params, grads, state.m, state.v,
                     state.step + 1, lr, state.train_config)
    state.step += 1
    state.loss_sum += parts.total
    state.detect_loss_sum += parts.detect_part
    state.correct_loss_sum += parts.correct_part
    state.loss_count += 1
    return state


# ---------------------------------------------------------------------------
# Data plumbing


class CorpusDataset:
    """In-memory (noisy, clean, mask) triples with deterministic batching.

    The batch for step s is slot s % batches_per_epoch of the permutation
    seeded by (seed, epoch), so any step's batch is reconstructible without
    replaying earlier steps.
    """

    def __init__(self, triples: Sequence[tuple[list[str], list[str], list[int]]],
                 word_vocab: Vocab, char_vocab: Vocab, n_max: int, l_max: int):
        if not triples:
            raise ValueError("empty corpus")
        self.triples = list(triples)
        self.word_vocab = word_vocab
        self.char_vocab = char_vocab
        self.n_max = n_max
        self.l_max = l_max

    def __len__(self) -> int:
        return len(self.triples)

    def batch_for_step(self, step_idx: int, batch_size: int, seed: int) -> dict[str, np.ndarray]:
        n = len(self.triples)
        bs = min(batch_size, n)
        per_epoch = max(1, n // bs)
        epoch = step_idx // per_epoch
        slot = step_idx % per_epoch
        perm = np.random.default_rng([seed, 104729, epoch]).permutation(n)
        idx = perm[slot * bs:(slot + 1) * bs]
        return self.stack([self.triples[i] for i in idx])

    def stack(self, triples: Sequence[tuple[list[str], list[str], list[int]]]) -> dict[str, np.ndarray]:
        # trim to the longest sentence/word in the batch: positional tables
        # slice cleanly and padded compute is wasted work
        n = min(self.n_max, max(len(t[0]) for t in triples))
        l = min(self.l_max, max((len(tok) for t in triples for tok in t[0][:n]), default=1))
        l = max(l, 1)
        exs = [encode(noisy, clean, mask, self.word_vocab, self.char_vocab,
                      self.n_max, self.l_max)
               for noisy, clean, mask in triples]
        return {
            "word_ids": np.stack([e.word_ids[:n] for e in exs]),
            "char_ids": np.stack([e.char_ids[:n, :l] for e in exs]),
            "attn_mask": np.stack([e.attn_mask[:n] for e in exs]),
            "detect_labels": np.stack([e.detect_labels[:n] for e in exs]),
            "correct_labels": np.stack([e.correct_labels[:n] for e in exs]),
        }


def build_vocabs_from_triples(triples, v_word: int, v_char: int) -> tuple[Vocab, Vocab]:
    """Word vocab over clean tokens; char vocab over noisy + clean tokens."""
    word_vocab = build_vocab((clean for _, clean, _ in triples), v_word, level="word")
    char_vocab = build_vocab(
        (noisy + clean for noisy, clean, _ in triples), v_char, level="char")
    return word_vocab, char_vocab


def _detector_eval(state: TrainState, dataset: CorpusDataset,
                   triples) -> evalmetrics.EvalReport:
    def predict_fn(tokens):
        preds = predict_tokens(tokens, state.params, state.model_config,
                               dataset.word_vocab, dataset.char_vocab, top_k=1)
        return [(p.is_error, p.suggestions[0].word if p.suggestions else None)
                for p in preds]

    return evalmetrics.evaluate_corpus(triples, predict_fn,
                                       word_vocab=dataset.word_vocab)


# ---------------------------------------------------------------------------
# Training loop


def train(
    corpus_path: Union[str, Path],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: Union[str, Path],
    heldout_fraction: float = 0.1,
    resume_from: Optional[Union[str, Path]] = None,
    quiet: bool = True,
) -> Path:
    """Train on a corrupted-corpus JSONL file; returns the final checkpoint path.

    Writes ``metrics.jsonl`` (step, loss parts, lr, held-out detector F1 when
    eval_every is set), periodic ``ckpt_step*.npz`` files and ``model.npz``.
    """
    train_cfg.validate()
    model_cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    triples = list(read_corrupted_jsonl(corpus_path))
    if not triples:
        raise ValueError(f"{corpus_path}: corpus is empty")
    keep_every = int(round(1.0 / heldout_fraction)) if heldout_fraction > 0 else 0
    heldout = [t for i, t in enumerate(triples) if keep_every and i % keep_every == 0]
    training = [t for i, t in enumerate(triples) if not keep_every or i % keep_every != 0]
    if not training:
        training = triples

    if resume_from is not None:
        ckpt = load_checkpoint(resume_from)
        model_cfg = ckpt.config
        word_vocab, char_vocab = ckpt.word_vocab, ckpt.char_vocab
        state = TrainState(
            step=int(ckpt.extra["train"]["step"]),
            params=ckpt.params,
            m={k[len("m:"):]: val for k, val in ckpt.opt_arrays.items() if k.startswith("m:")},
            v={k[len("v:"):]: val for k, val in ckpt.opt_arrays.items() if k.startswith("v:")},
            model_config=model_cfg,
            train_config=train_cfg,
        )
    else:
        word_vocab, char_vocab = build_vocabs_from_triples(
            training, model_cfg.v_word, model_cfg.v_char)
        model_cfg.v_word = len(word_vocab)
        model_cfg.v_char = len(char_vocab)
        state = init_state(model_cfg, train_cfg)

    dataset = CorpusDataset(training, word_vocab, char_vocab,
                            model_cfg.n_max, model_cfg.l_max)
    word_vocab.save(out_dir / "word_vocab.txt")
    char_vocab.save(out_dir / "char_vocab.txt")

    metrics_path = out_dir / "metrics.jsonl"
    t0 = time.time()
    with open(metrics_path, "a", encoding="utf-8") as metrics:
        while state.step < train_cfg.max_steps:
            batch = dataset.batch_for_step(state.step, train_cfg.batch_size,
                                           train_cfg.seed)
            step(state, batch)
            if train_cfg.log_every and state.step % train_cfg.log_every == 0:
                record = {"step": state.step,
                          **state.running_means(),
                          "lr": lr_at(state.step - 1, train_cfg.schedule())}
                if train_cfg.eval_every and heldout and state.step % train_cfg.eval_every == 0:
                    report = _detector_eval(state, dataset, heldout)
                    record["val_f1"] = report.f1
                    record["val_acc_in_detected"] = report.acc_in_detected
                metrics.write(json.dumps(record) + "\n")
                metrics.flush()
                if not quiet:
                    print(f"step {state.step}: " + json.dumps(record))
                state.reset_running()
            if (train_cfg.checkpoint_every and
                    state.step % train_cfg.checkpoint_every == 0):
                save_state(state, word_vocab, char_vocab,
                           out_dir / f"ckpt_step{state.step}.npz")

    final = out_dir / "model.npz"
    save_state(state, word_vocab, char_vocab, final)
    if not quiet:
        print(f"trained {state.step} steps in {time.time() - t0:.1f}s -> {final}")
    return final


def save_state(state: TrainState, word_vocab: Vocab, char_vocab: Vocab,
               path: Union[str, Path]) -> str:
    opt = {f"m:{k}": val for k, val in state.m.items()}
    opt.update({f"v:{k}": val for k, val in state.v.items()})
    extra = {"train": {"step": state.step,
                       "train_config": state.train_config.to_dict()}}
    return save_checkpoint(path, state.params, state.model_config,
                           word_vocab, char_vocab, extra=extra, opt_arrays=opt)


# ---------------------------------------------------------------------------
# Overfit harness


def predict_fn_from_checkpoint(ckpt, top_k: int = 1):
    """(is_error, top_suggestion) prediction function for evaluate_* APIs."""

    def predict_fn(tokens):
        preds = predict_tokens(tokens, ckpt.params, ckpt.config,
                               ckpt.word_vocab, ckpt.char_vocab, top_k=top_k)
        return [(p.is_error, p.suggestions[0].word if p.suggestions else None)
                for p in preds]

    return predict_fn


def overfit_harness(
    fixture_lines: Sequence[str],
    out_dir: Union[str, Path],
    corruption_spec=None,
    n_sentences: int = 200,
    max_steps: int = 1500,
    lr: float = 1e-3,
    batch_size: int = 32,
    seed: int = 0,
    model_overrides: Optional[dict] = None,
) -> Path:
    """Corrupt a slice of the fixture corpus and fit the desk preset to it.

    Returns the final checkpoint path; the generated corpus is left next to
    it as overfit_corpus.jsonl so callers can evaluate on the exact shard
    that was trained on.
    """
    from . import errorgen
    from .model import desk_preset

    spec = corruption_spec or errorgen.CorruptionSpec(rng_seed=seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "overfit_corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as f:
        for sent in errorgen.stream_corpus(fixture_lines[:n_sentences], spec):
            f.write(sent.to_json() + "\n")

    model_cfg = desk_preset(v_word=4000, v_char=256, **(model_overrides or {}))
    train_cfg = TrainConfig(lr=lr, total_steps=max_steps, max_steps=max_steps,
                            batch_size=batch_size, seed=seed,
                            log_every=100, eval_every=0)
    return train(corpus_path, model_cfg, train_cfg, out_dir,
                 heldout_fraction=0.0)
