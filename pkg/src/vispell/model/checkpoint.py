"""Versioned model checkpoints: config + vocabs + all tensors in one npz."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..textdata import Vocab
from .config import ModelConfig
from .network import expected_shapes

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def model_digest(params: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    for name in sorted(params):
        h.update(name.encode())
        h.update(np.ascontiguousarray(params[name]).tobytes())
    return h.hexdigest()[:12]


@dataclass
class Checkpoint:
    params: dict[str, np.ndarray]
    config: ModelConfig
    word_vocab: Vocab
    char_vocab: Vocab
    model_version: str
    extra: dict
    opt_arrays: dict[str, np.ndarray]


def save_checkpoint(
    path: Union[str, Path],
    params: dict[str, np.ndarray],
    config: ModelConfig,
    word_vocab: Vocab,
    char_vocab: Vocab,
    extra: Optional[dict] = None,
    opt_arrays: Optional[dict[str, np.ndarray]] = None,
) -> str:
    """Write the checkpoint and return its content digest."""
    version = model_digest(params)
    meta = {
        "format_version": FORMAT_VERSION,
        "model_version": version,
        "config": config.to_dict(),
        "word_vocab": word_vocab.id_to_token,
        "char_vocab": char_vocab.id_to_token,
        "extra": extra or {},
    }
    arrays = {f"param:{k}": v for k, v in params.items()}
    for k, v in (opt_arrays or {}).items():
        arrays[f"opt:{k}"] = v
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.savez_compressed(f, __meta__=np.frombuffer(
            json.dumps(meta, ensure_ascii=False).encode("utf-8"), dtype=np.uint8),
            **arrays)
    return version


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Load and validate: shapes must match the config, tying must hold."""
    with np.load(path, allow_pickle=False) as z:
        if "__meta__" not in z:
            raise CheckpointError(f"{path}: not a vispell checkpoint")
        meta = json.loads(bytes(z["__meta__"]).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(
                f"{path}: unsupported format version {meta.get('format_version')}")
        params = {k[len("param:"):]: z[k] for k in z.files if k.startswith("param:")}
        opt_arrays = {k[len("opt:"):]: z[k] for k in z.files if k.startswith("opt:")}

    config = ModelConfig.from_dict(meta["config"])
    word_vocab = Vocab(meta["word_vocab"])
    char_vocab = Vocab(meta["char_vocab"])

    shapes = expected_shapes(config)
    if set(shapes) != set(params):
        missing = sorted(set(shapes) - set(params))
        extra_keys = sorted(set(params) - set(shapes))
        raise CheckpointError(
            f"{path}: tensor set mismatch (missing {missing}, unexpected {extra_keys}); "
            "a separate correction output weight would break the tying invariant")
    for name, shape in shapes.items():
        if tuple(params[name].shape) != shape:
            raise CheckpointError(
                f"{path}: {name} has shape {params[name].shape}, expected {shape}")
    if len(word_vocab) != config.v_word or len(char_vocab) != config.v_char:
        raise CheckpointError(f"{path}: vocab sizes disagree with config")

    return Checkpoint(params, config, word_vocab, char_vocab,
                      meta["model_version"], meta.get("extra", {}), opt_arrays)
