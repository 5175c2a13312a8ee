"""Model hyperparameters and the two named presets."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional


@dataclass
class ModelConfig:
    char_layers: int = 2
    char_hidden: int = 64
    char_heads: int = 4
    word_layers: int = 4
    word_hidden: int = 128
    word_heads: int = 4
    ffn_multiplier: int = 4
    n_max: int = 64
    l_max: int = 16
    v_word: int = 8000
    v_char: int = 256
    dropout_rate: float = 0.0
    word_emb_dim: Optional[int] = None  # defaults to word_hidden
    char_pool: str = "mean"             # mean | first | max
    share_layers: bool = False          # ALBERT-style cross-layer sharing

    @property
    def d_word(self) -> int:
        return self.word_emb_dim if self.word_emb_dim is not None else self.word_hidden

    def validate(self) -> None:
        if self.char_hidden % self.char_heads:
            raise ValueError("char_hidden must be divisible by char_heads")
        if self.word_hidden % self.word_heads:
            raise ValueError("word_hidden must be divisible by word_heads")
        if self.char_pool not in ("mean", "first", "max"):
            raise ValueError(f"unknown char_pool {self.char_pool!r}")
        for name in ("char_layers", "word_layers", "n_max", "l_max", "v_word", "v_char"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.v_word < 3 or self.v_char < 3:
            raise ValueError("vocab sizes must cover PAD/UNK plus content")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        cfg = cls(**obj)
        cfg.validate()
        return cfg


def desk_preset(v_word: int, v_char: int, **overrides) -> ModelConfig:
    """Small configuration that trains in minutes on a laptop CPU."""
    cfg = ModelConfig(
        char_layers=2, char_hidden=64, char_heads=4,
        word_layers=4, word_hidden=128, word_heads=4,
        n_max=64, l_max=16, v_word=v_word, v_char=v_char,
        dropout_rate=0.0,
    )
    for key, val in overrides.items():
        setattr(cfg, key, val)
    cfg.validate()
    return cfg


def paper_preset(**overrides) -> ModelConfig:
    """Full-scale configuration: 4x256 char encoder, 12x768 word encoder,
    positions up to 192, vocabularies 60k / 400.

    The word hidden size is 768 (BERT-base width); 786 is not divisible by
    any standard head count.
    """
    cfg = ModelConfig(
        char_layers=4, char_hidden=256, char_heads=4,
        word_layers=12, word_hidden=768, word_heads=12,
        n_max=192, l_max=16, v_word=60_000, v_char=400,
        dropout_rate=0.1,
    )
    for key, val in overrides.items():
        setattr(cfg, key, val)
    cfg.validate()
    return cfg
