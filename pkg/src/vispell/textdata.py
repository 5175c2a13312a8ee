"""Tokenization, vocabularies, id-space encoding and corpus readers.

Tokens come from whitespace splitting with punctuation runs separated into
their own tokens (without that, nearly every sentence-final word would be
out-of-vocab).  Word vocabularies are built over lowercased tokens; character
ids preserve case.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

_TOKEN_RE = re.compile(r"\w+|[^\w\s]+")


class CorpusError(ValueError):
    """Raised for malformed corpus or test-set input."""


def tokenize(text: str) -> list[str]:
    """Split on whitespace, then split punctuation runs into own tokens."""
    return _TOKEN_RE.findall(text)


def tokenize_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Like tokenize() but with (token, start, end) character offsets."""
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with spaces, re-attaching punctuation.

    No space is inserted before closing punctuation (``, . ! ? ; : ) ] }``)
    or after opening brackets/quotes, so ordinary prose reconstructs its
    whitespace-normalized form exactly.
    """
    out: list[str] = []
    for tok in tokens:
        if out and (_closes(tok) or _opens(out[-1])):
            out[-1] = out[-1] + tok
        else:
            out.append(tok)
    return " ".join(out)


def _closes(tok: str) -> bool:
    return all(c in ",.!?;:)]}%…" for c in tok)


def _opens(tok: str) -> bool:
    return all(c in "([{" for c in tok)


# ---------------------------------------------------------------------------
# Vocabularies


@dataclass
class Vocab:
    """Dense token<->id map with PAD=0 and UNK=1."""

    id_to_token: list[str]
    token_to_id: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.id_to_token[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("vocab must start with PAD, UNK")
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocab")

    def __len__(self) -> int:
        return len(self.id_to_token)

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, idx: int) -> str:
        return self.id_to_token[idx]

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text("\n".join(self.id_to_token) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Vocab":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ln for ln in lines if ln])


def build_vocab(
    corpus_source: Iterable[Sequence[str]],
    max_size: int,
    level: str = "word",
) -> Vocab:
    """Most frequent tokens (or characters) up to ``max_size`` incl. specials.

    ``corpus_source`` yields token sequences.  Word level counts tokens
    lowercased; char level counts the characters of every token verbatim.
    Frequency ties break lexicographically.
    """
    if max_size < 3:
        raise ValueError("max_size must be >= 3")
    if level not in ("word", "char"):
        raise ValueError(f"unknown vocab level: {level!r}")
    counts: Counter[str] = Counter()
    for tokens in corpus_source:
        for tok in tokens:
            if level == "word":
                counts[tok.lower()] += 1
            else:
                counts.update(tok)
    counts.pop(PAD_TOKEN, None)
    counts.pop(UNK_TOKEN, None)
    if not counts:
        raise CorpusError("empty corpus: nothing to build a vocabulary from")
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [tok for tok, _ in ordered[: max_size - 2]]
    return Vocab([PAD_TOKEN, UNK_TOKEN] + keep)


# ---------------------------------------------------------------------------
# Encoded examples


@dataclass
class EncodedExample:
    """One sentence in id space, padded to (n_max, l_max).

    detect_labels marks corrupted positions; correct_labels carries the gold
    clean-token ids (UNK when the gold word is out of vocab).
    """

    word_ids: np.ndarray      # (n_max,) int64
    char_ids: np.ndarray      # (n_max, l_max) int64
    detect_labels: np.ndarray # (n_max,) int64 in {0,1}
    correct_labels: np.ndarray# (n_max,) int64
    attn_mask: np.ndarray     # (n_max,) int64 in {0,1}

    @property
    def length(self) -> int:
        return int(self.attn_mask.sum())


def encode(
    noisy_tokens: Sequence[str],
    clean_tokens: Sequence[str],
    error_mask: Sequence[int],
    word_vocab: Vocab,
    char_vocab: Vocab,
    n_max: int,
    l_max: int,
) -> EncodedExample:
    """Map a (noisy, clean, mask) triple into padded id arrays.

    Noisy tokens are looked up lowercased in the word vocab (OOV -> UNK) and
    spelled out through the char vocab; clean tokens become correction
    targets.  Truncation to n_max / l_max keeps the example valid.
    """
    if not noisy_tokens:
        raise ValueError("cannot encode an empty sentence")
    if not (len(noisy_tokens) == len(clean_tokens) == len(error_mask)):
        raise ValueError("noisy/clean/mask length mismatch")
    n = min(len(noisy_tokens), n_max)
    word_ids = np.full(n_max, PAD_ID, dtype=np.int64)
    char_ids = np.full((n_max, l_max), PAD_ID, dtype=np.int64)
    detect = np.zeros(n_max, dtype=np.int64)
    correct = np.full(n_max, PAD_ID, dtype=np.int64)
    attn = np.zeros(n_max, dtype=np.int64)
    for i in range(n):
        word_ids[i] = word_vocab.id_of(noisy_tokens[i].lower())
        for j, ch in enumerate(noisy_tokens[i][:l_max]):
            char_ids[i, j] = char_vocab.id_of(ch)
        detect[i] = 1 if error_mask[i] else 0
        correct[i] = word_vocab.id_of(clean_tokens[i].lower())
        attn[i] = 1
    return EncodedExample(word_ids, char_ids, detect, correct, attn)


def encode_tokens(
    tokens: Sequence[str],
    word_vocab: Vocab,
    char_vocab: Vocab,
    n_max: int,
    l_max: int,
) -> EncodedExample:
    """Encode plain tokens for inference (labels all zero)."""
    return encode(tokens, tokens, [0] * len(tokens), word_vocab, char_vocab, n_max, l_max)


# ---------------------------------------------------------------------------
# Corrupted-corpus JSONL


def read_corrupted_jsonl(path: Union[str, Path]) -> Iterator[tuple[list[str], list[str], list[int]]]:
    """Yield (noisy, clean, mask) triples from a generator output file."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                noisy, clean, mask = obj["noisy"], obj["clean"], obj["mask"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
            if not (len(noisy) == len(clean) == len(mask)):
                raise CorpusError(f"{path}:{lineno}: noisy/clean/mask lengths differ")
            yield noisy, clean, mask


# ---------------------------------------------------------------------------
# Wiki spelling test set


@dataclass
class Mistake:
    token_index: int
    wrong: str
    suggestions: list[str]


@dataclass
class WikiTestDocument:
    """One revised article: text plus annotated mistakes.

    ``token_index`` addresses tokens of ``text`` under plain whitespace
    splitting (``text.split()``).
    """

    id: str
    text: str
    current_revision_id: str
    previous_revision_id: str
    page_id: str
    mistakes: list[Mistake]

    def whitespace_tokens(self) -> list[str]:
        return self.text.split()


_REQUIRED_DOC_FIELDS = ("id", "text", "current_revision_id", "previous_revision_id", "page_id", "mistakes")


def read_wiki_testset(path: Union[str, Path], strict: bool = True) -> list[WikiTestDocument]:
    """Parse the JSONL test set, validating mistake indices and suggestions.

    In strict mode any malformed record raises CorpusError naming the line;
    otherwise bad records are skipped.
    """
    docs: list[WikiTestDocument] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                docs.append(_parse_wiki_doc(json.loads(line)))
            except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
                if strict:
                    raise CorpusError(f"{path}:{lineno}: {exc}") from exc
    return docs


def _parse_wiki_doc(obj: dict) -> WikiTestDocument:
    for key in _REQUIRED_DOC_FIELDS:
        if key not in obj:
            raise ValueError(f"missing field {key!r}")
    n_tokens = len(str(obj["text"]).split())
    mistakes = []
    for m in obj["mistakes"]:
        idx = int(m["token_index"])
        if not 0 <= idx < n_tokens:
            raise ValueError(f"mistake token_index {idx} out of range (document has {n_tokens} tokens)")
        suggestions = [str(s) for s in m["suggestions"]]
        if not suggestions:
            raise ValueError(f"mistake at token {idx} has no suggestions")
        mistakes.append(Mistake(idx, str(m["wrong"]), suggestions))
    return WikiTestDocument(
        id=str(obj["id"]),
        text=str(obj["text"]),
        current_revision_id=str(obj["current_revision_id"]),
        previous_revision_id=str(obj["previous_revision_id"]),
        page_id=str(obj["page_id"]),
        mistakes=mistakes,
    )


def write_wiki_testset(docs: Iterable[WikiTestDocument], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc in docs:
            obj = {
                "id": doc.id,
                "text": doc.text,
                "current_revision_id": doc.current_revision_id,
                "previous_revision_id": doc.previous_revision_id,
                "page_id": doc.page_id,
                "mistakes": [
                    {"token_index": m.token_index, "wrong": m.wrong, "suggestions": m.suggestions}
                    for m in doc.mistakes
                ],
            }
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")
