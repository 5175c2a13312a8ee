"""Rule-based corruptor: clean text in, (noisy, clean, mask) triples out.

Nine error classes cover mistyping (insert / omit / substitute / transpose /
compound edits and wrong tone keys, all applied in keystroke space), raw
input-method leaks ("nội" -> "nooij"), regional onset/tone confusions
("nội" -> "lội") and full diacritic stripping.  At most one class is applied
per token, so the gold label stays a single substitution.
"""

from __future__ import annotations

import enum
import json
import random
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Optional

from . import syllable as sy
from .textdata import tokenize


class ErrorClass(enum.Enum):
    TYPO_INSERTION = "typo_insertion"
    TYPO_OMISSION = "typo_omission"
    TYPO_SUBSTITUTION = "typo_substitution"
    TYPO_TRANSPOSITION = "typo_transposition"
    TYPO_COMPOUND = "typo_compound"
    TYPO_DIACRITIC = "typo_diacritic"
    KEYSTROKE_LEAK = "keystroke_leak"
    REGIONAL_CONFUSION = "regional_confusion"
    DIACRITIC_STRIP = "diacritic_strip"


def _load_json(name: str) -> dict:
    return json.loads((resources.files("vispell") / "data" / name).read_text("utf-8"))


_QWERTY: dict[str, str] = _load_json("qwerty_neighbors.json")
_CONFUSIONS = _load_json("confusion_pairs.json")
_TONE_BY_NAME = {t.value: t for t in sy.Tone}
_TONE_CONFUSIONS: dict[sy.Tone, list[sy.Tone]] = {}
for _a, _b in _CONFUSIONS["tone_pairs"]:
    _TONE_CONFUSIONS.setdefault(_TONE_BY_NAME[_a], []).append(_TONE_BY_NAME[_b])
    _TONE_CONFUSIONS.setdefault(_TONE_BY_NAME[_b], []).append(_TONE_BY_NAME[_a])


@dataclass
class CorruptionSpec:
    """Error mix configuration; all randomness is owned by the caller's rng."""

    per_token_error_rate: float = 0.15
    clean_sentence_rate: float = 0.2
    full_strip_sentence_rate: float = 0.1
    class_weights: dict[ErrorClass, float] = field(
        default_factory=lambda: {cls: 1.0 for cls in ErrorClass}
    )
    scheme_mix: float = 0.7  # probability of Telex (vs VNI) for keystroke classes
    rng_seed: int = 0

    def validate(self) -> None:
        for name in ("per_token_error_rate", "clean_sentence_rate",
                     "full_strip_sentence_rate", "scheme_mix"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if any(w < 0 for w in self.class_weights.values()):
            raise ValueError("class weights must be non-negative")
        if sum(self.class_weights.values()) <= 0:
            raise ValueError("class weights must have positive sum")

    def to_dict(self) -> dict:
        return {
            "per_token_error_rate": self.per_token_error_rate,
            "clean_sentence_rate": self.clean_sentence_rate,
            "full_strip_sentence_rate": self.full_strip_sentence_rate,
            "class_weights": {cls.value: w for cls, w in self.class_weights.items()},
            "scheme_mix": self.scheme_mix,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CorruptionSpec":
        spec = cls()
        for name in ("per_token_error_rate", "clean_sentence_rate",
                     "full_strip_sentence_rate", "scheme_mix", "rng_seed"):
            if name in obj:
                setattr(spec, name, obj[name])
        if "class_weights" in obj:
            spec.class_weights = {
                ErrorClass(name): float(w) for name, w in obj["class_weights"].items()
            }
        spec.validate()
        return spec


@dataclass
class CorruptedSentence:
    noisy_tokens: list[str]
    clean_tokens: list[str]
    error_mask: list[int]

    def __post_init__(self) -> None:
        if not (len(self.noisy_tokens) == len(self.clean_tokens) == len(self.error_mask)):
            raise ValueError("noisy/clean/mask lengths differ")

    def to_json(self) -> str:
        return json.dumps(
            {"noisy": self.noisy_tokens, "clean": self.clean_tokens, "mask": self.error_mask},
            ensure_ascii=False,
        )


# ---------------------------------------------------------------------------
# Keystroke-level edits


def _neighbor_key(ch: str, rng: random.Random) -> str:
    near = _QWERTY.get(ch.lower())
    if near:
        return rng.choice(near)
    return rng.choice(string.ascii_lowercase)


def _edit_insert(keys: str, rng: random.Random) -> str:
    pos = rng.randrange(len(keys) + 1)
    anchor = keys[pos - 1] if pos > 0 else keys[0]
    return keys[:pos] + _neighbor_key(anchor, rng) + keys[pos:]


def _edit_omit(keys: str, rng: random.Random) -> str:
    if len(keys) < 2:
        return keys
    pos = rng.randrange(len(keys))
    return keys[:pos] + keys[pos + 1:]


def _edit_substitute(keys: str, rng: random.Random) -> str:
    pos = rng.randrange(len(keys))
    repl = _neighbor_key(keys[pos], rng)
    if repl == keys[pos]:
        return keys
    return keys[:pos] + repl + keys[pos + 1:]


def _edit_transpose(keys: str, rng: random.Random) -> str:
    pairs = [i for i in range(len(keys) - 1) if keys[i] != keys[i + 1]]
    if not pairs:
        return keys
    i = rng.choice(pairs)
    return keys[:i] + keys[i + 1] + keys[i] + keys[i + 2:]


_BASIC_EDITS = [_edit_insert, _edit_omit, _edit_substitute, _edit_transpose]

_TELEX_TONE_KEYS = "sfrxj"
_VNI_TONE_KEYS = "12345"


def _edit_tone_key(keys: str, scheme: sy.KeystrokeScheme, rng: random.Random) -> str:
    tone_keys = _TELEX_TONE_KEYS if scheme is sy.KeystrokeScheme.TELEX else _VNI_TONE_KEYS
    if keys and keys[-1] in tone_keys:
        # wrong tone key, or tone forgotten entirely
        options = [k for k in tone_keys if k != keys[-1]] + [""]
        return keys[:-1] + rng.choice(options)
    return keys + rng.choice(tone_keys)


# ---------------------------------------------------------------------------
# Per-class corruption


def _typo(token: str, cls: ErrorClass, rng: random.Random, scheme: sy.KeystrokeScheme) -> str:
    parsed = sy.parse_syllable(token)
    if isinstance(parsed, sy.NotASyllable):
        if cls is ErrorClass.TYPO_DIACRITIC:
            return token  # no tone keys to get wrong
        keys = token
        edited = _apply_typo_edit(keys, cls, rng, scheme)
        return edited
    keys = sy.to_keystrokes(parsed, scheme)
    edited = _apply_typo_edit(keys, cls, rng, scheme)
    if edited == keys:
        return token
    recomposed = sy.from_keystrokes(edited, scheme)
    return sy.apply_case_pattern(recomposed, sy.case_pattern(token))


def _apply_typo_edit(keys: str, cls: ErrorClass, rng: random.Random,
                     scheme: sy.KeystrokeScheme) -> str:
    if not keys:
        return keys
    if cls is ErrorClass.TYPO_INSERTION:
        return _edit_insert(keys, rng)
    if cls is ErrorClass.TYPO_OMISSION:
        return _edit_omit(keys, rng)
    if cls is ErrorClass.TYPO_SUBSTITUTION:
        return _edit_substitute(keys, rng)
    if cls is ErrorClass.TYPO_TRANSPOSITION:
        return _edit_transpose(keys, rng)
    if cls is ErrorClass.TYPO_DIACRITIC:
        return _edit_tone_key(keys, scheme, rng)
    if cls is ErrorClass.TYPO_COMPOUND:
        out = keys
        for _ in range(rng.randint(2, 3)):
            out = rng.choice(_BASIC_EDITS)(out, rng)
        return out
    raise ValueError(f"not a typo class: {cls}")


def _regional(token: str, rng: random.Random) -> str:
    parsed = sy.parse_syllable(token)
    if isinstance(parsed, sy.NotASyllable):
        return token
    lower = sy.Syllable(parsed.onset, parsed.nucleus, parsed.coda, parsed.tone).render()
    onset, rest = parsed.onset, lower[len(parsed.onset):]
    # "gì" parses as g + i...; for confusion purposes the onset is gi and the
    # written i stays with the rest.
    if onset == "g" and parsed.nucleus.startswith("i"):
        onset, rest = "gi", lower[1:]
    candidates: list[str] = []
    for group in _CONFUSIONS["onset_groups"]:
        if onset in group:
            for other in group:
                if other == onset:
                    continue
                if other == "gi" and rest[:1] in "iy":
                    cand = "g" + rest
                else:
                    cand = other + rest
                if cand != lower and cand in sy.default_inventory():
                    candidates.append(cand)
    for other_tone in _TONE_CONFUSIONS.get(parsed.tone, []):
        cand = sy.Syllable(parsed.onset, parsed.nucleus, parsed.coda, other_tone).render()
        if cand != lower and cand in sy.default_inventory():
            candidates.append(cand)
    if not candidates:
        return token
    return sy.apply_case_pattern(rng.choice(candidates), sy.case_pattern(token))


def corrupt_token(
    token: str,
    cls: ErrorClass,
    rng: random.Random,
    scheme: sy.KeystrokeScheme = sy.KeystrokeScheme.TELEX,
) -> str:
    """Apply one error class; returns the token unchanged when inapplicable."""
    if not token:
        return token
    if cls is ErrorClass.DIACRITIC_STRIP:
        return sy.strip_diacritics(token)
    if cls is ErrorClass.KEYSTROKE_LEAK:
        parsed = sy.parse_syllable(token)
        if isinstance(parsed, sy.NotASyllable):
            return token
        raw = sy.to_keystrokes(parsed, scheme)
        return sy.apply_case_pattern(raw, sy.case_pattern(token))
    if cls is ErrorClass.REGIONAL_CONFUSION:
        return _regional(token, rng)
    return _typo(token, cls, rng, scheme)


_FALLBACK_CLASSES = (ErrorClass.TYPO_SUBSTITUTION, ErrorClass.TYPO_INSERTION)


def corrupt_sentence(
    clean_tokens: list[str],
    spec: CorruptionSpec,
    rng: random.Random,
    stats: Optional[Counter] = None,
) -> CorruptedSentence:
    """Corrupt one sentence according to the configured branch probabilities.

    Branches, in order: keep the sentence clean; strip every strippable
    token's diacritics; corrupt each token independently at the per-token
    rate (falling back to a plain substitution when the sampled class does
    not apply, so the configured rate is actually realised).
    """
    if not clean_tokens:
        raise ValueError("cannot corrupt an empty sentence")
    branch = rng.random()
    if branch < spec.clean_sentence_rate:
        if stats is not None:
            stats["branch:clean"] += 1
        return CorruptedSentence(list(clean_tokens), list(clean_tokens), [0] * len(clean_tokens))
    if branch < spec.clean_sentence_rate + spec.full_strip_sentence_rate:
        noisy = [sy.strip_diacritics(t) for t in clean_tokens]
        mask = [1 if n != c else 0 for n, c in zip(noisy, clean_tokens)]
        if stats is not None:
            stats["branch:full_strip"] += 1
            stats[ErrorClass.DIACRITIC_STRIP] += sum(mask)
        return CorruptedSentence(noisy, list(clean_tokens), mask)
    if stats is not None:
        stats["branch:corrupt"] += 1

    classes = [cls for cls in ErrorClass if spec.class_weights.get(cls, 0.0) > 0]
    weights = [spec.class_weights[cls] for cls in classes]
    noisy, mask = [], []
    for tok in clean_tokens:
        out = tok
        if rng.random() < spec.per_token_error_rate:
            cls = rng.choices(classes, weights)[0]
            scheme = (sy.KeystrokeScheme.TELEX if rng.random() < spec.scheme_mix
                      else sy.KeystrokeScheme.VNI)
            out = corrupt_token(tok, cls, rng, scheme=scheme)
            for fallback in _FALLBACK_CLASSES:
                if out != tok:
                    break
                cls = fallback
                out = corrupt_token(tok, fallback, rng, scheme=scheme)
            if out != tok and stats is not None:
                stats[cls] += 1
        noisy.append(out)
        mask.append(1 if out != tok else 0)
    return CorruptedSentence(noisy, list(clean_tokens), mask)


def stream_corpus(
    clean_text_source: Iterable[str],
    spec: CorruptionSpec,
    max_tokens: int = 192,
    stats: Optional[Counter] = None,
) -> Iterator[CorruptedSentence]:
    """Corrupt a one-sentence-per-line text source into training triples.

    Lines longer than ``max_tokens`` (and empty lines) are skipped.  I/O
    errors are re-raised with the source line number attached.
    """
    spec.validate()
    rng = random.Random(spec.rng_seed)
    lineno = 0
    source = iter(clean_text_source)
    while True:
        lineno += 1
        try:
            line = next(source)
        except StopIteration:
            return
        except (OSError, UnicodeError) as exc:
            raise OSError(f"corpus source failed at line {lineno}: {exc}") from exc
        tokens = tokenize(line)
        if not tokens or len(tokens) > max_tokens:
            continue
        yield corrupt_sentence(tokens, spec, rng, stats=stats)
