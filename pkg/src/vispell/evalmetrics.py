"""Detector precision/recall/F1 and the two corrector accuracy figures.

Counting happens per aligned token position.  A flagged true error whose top
suggestion matches any acceptable gold form is an exact correction; flagged
true errors with a different suggestion are wrong corrections; flagged clean
tokens are wrong detections (identically the false positives).  Missed errors
only hurt recall: the accuracy-in-total denominator is exact + wrong
correction + wrong detection, deliberately excluding false negatives.

Counts form a monoid, so shards can be evaluated in parallel and merged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from .textdata import Vocab, WikiTestDocument

GoldTarget = Union[str, Sequence[str], None]
PredictFn = Callable[[list[str]], Sequence[tuple[bool, Optional[str]]]]


@dataclass
class EvalCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    n_exact_correction: int = 0
    n_wrong_correction: int = 0
    n_wrong_detection: int = 0

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn,
            self.n_exact_correction + other.n_exact_correction,
            self.n_wrong_correction + other.n_wrong_correction,
            self.n_wrong_detection + other.n_wrong_detection,
        )

    def validate(self) -> None:
        if min(self.tp, self.fp, self.fn, self.n_exact_correction,
               self.n_wrong_correction, self.n_wrong_detection) < 0:
            raise ValueError("counts must be non-negative")
        if self.n_exact_correction + self.n_wrong_correction > self.tp:
            raise ValueError("corrections cannot exceed true positives")
        if self.n_wrong_detection != self.fp:
            raise ValueError("wrong detections must equal false positives")


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    acc_in_detected: float
    acc_in_total: float
    counts: EvalCounts

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "acc_in_detected": self.acc_in_detected,
            "acc_in_total": self.acc_in_total,
            "counts": {
                "tp": self.counts.tp, "fp": self.counts.fp, "fn": self.counts.fn,
                "n_exact_correction": self.counts.n_exact_correction,
                "n_wrong_correction": self.counts.n_wrong_correction,
                "n_wrong_detection": self.counts.n_wrong_detection,
            },
        }

    def table(self) -> str:
        """Table-style rendering: detector columns then corrector columns."""
        head = f"{'Precision':>10} {'Recall':>10} {'F1':>10} {'in total':>10} {'in % detected':>14}"
        row = (f"{self.precision * 100:>10.2f} {self.recall * 100:>10.2f} "
               f"{self.f1 * 100:>10.2f} {self.acc_in_total * 100:>10.2f} "
               f"{self.acc_in_detected * 100:>14.2f}")
        return head + "\n" + row


def _matches(top1: Optional[str], gold: GoldTarget) -> bool:
    if top1 is None or gold is None:
        return False
    if isinstance(gold, str):
        return top1 == gold
    return top1 in gold


def accumulate(
    gold_mask: Sequence[int],
    gold_targets: Sequence[GoldTarget],
    pred_flags: Sequence[bool],
    pred_top1: Sequence[Optional[str]],
    correction_eligible: Optional[Sequence[bool]] = None,
) -> EvalCounts:
    """Count one aligned sentence.

    ``gold_targets[i]`` is the acceptable correction(s) at an error position
    (a prediction matching any of several listed forms is exact).  Positions
    with ``correction_eligible[i]`` false still count for detection but are
    left out of the correction tallies (used for gold words outside the
    model's output vocabulary).
    """
    n = len(gold_mask)
    if not (len(gold_targets) == len(pred_flags) == len(pred_top1) == n):
        raise ValueError("gold/prediction length mismatch")
    if correction_eligible is not None and len(correction_eligible) != n:
        raise ValueError("correction_eligible length mismatch")
    counts = EvalCounts()
    for i in range(n):
        gold_err = bool(gold_mask[i])
        flagged = bool(pred_flags[i])
        if gold_err and flagged:
            counts.tp += 1
            if correction_eligible is None or correction_eligible[i]:
                if _matches(pred_top1[i], gold_targets[i]):
                    counts.n_exact_correction += 1
                else:
                    counts.n_wrong_correction += 1
        elif gold_err:
            counts.fn += 1
        elif flagged:
            counts.fp += 1
            counts.n_wrong_detection += 1
    return counts


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def finalize(counts: EvalCounts) -> EvalReport:
    counts.validate()
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    acc_in_detected = _ratio(
        counts.n_exact_correction,
        counts.n_exact_correction + counts.n_wrong_correction)
    acc_in_total = _ratio(
        counts.n_exact_correction,
        counts.n_exact_correction + counts.n_wrong_correction + counts.n_wrong_detection)
    return EvalReport(precision, recall, f1, acc_in_detected, acc_in_total, counts)


def evaluate_testset(docs: Iterable[WikiTestDocument], predict_fn: PredictFn) -> EvalReport:
    """Score a prediction function over wiki test documents.

    Documents are whitespace-tokenized (the index space of their mistake
    annotations); ``predict_fn`` receives the token list and returns one
    (is_error, top_suggestion) pair per token.
    """
    total = EvalCounts()
    for doc in docs:
        tokens = doc.whitespace_tokens()
        gold_mask = [0] * len(tokens)
        gold_targets: list[GoldTarget] = [None] * len(tokens)
        for mistake in doc.mistakes:
            gold_mask[mistake.token_index] = 1
            gold_targets[mistake.token_index] = mistake.suggestions
        preds = list(predict_fn(tokens))
        if len(preds) != len(tokens):
            raise ValueError(
                f"doc {doc.id}: prediction length {len(preds)} != {len(tokens)} tokens")
        flags = [p[0] for p in preds]
        top1 = [p[1] for p in preds]
        total = total + accumulate(gold_mask, gold_targets, flags, top1)
    return finalize(total)


def evaluate_corpus(
    triples: Iterable[tuple[list[str], list[str], list[int]]],
    predict_fn: PredictFn,
    word_vocab: Optional[Vocab] = None,
) -> EvalReport:
    """Score over generated (noisy, clean, mask) triples.

    When a word vocab is given, positions whose gold token cannot be produced
    by the model (out of vocab) are excluded from the correction tallies;
    they still count for detection.
    """
    total = EvalCounts()
    for noisy, clean, mask in triples:
        preds = list(predict_fn(list(noisy)))
        if len(preds) != len(noisy):
            raise ValueError("prediction length mismatch")
        eligible = None
        if word_vocab is not None:
            eligible = [tok.lower() in word_vocab for tok in clean]
        total = total + accumulate(
            mask, [c.lower() for c in clean],
            [p[0] for p in preds], [p[1] for p in preds],
            correction_eligible=eligible,
        )
    return finalize(total)
