"""Hierarchical char/word transformer encoder with dual heads.

Per-word character sequences run through a small character encoder and are
pooled to one vector per word; word embeddings (plus learned positions) are
concatenated with those vectors, projected to the word width and run through
the word encoder.  A two-layer detection head scores is-error per token; the
correction head projects back to the embedding width and scores the word
vocabulary through the transposed word embedding table, which is the same
array as the input embedding (tied storage, summed gradient).

The joint loss divides the detection cross-entropy by the number of real
tokens and the correction cross-entropy by the number of true mistakes, each
with a 1e-5 smoothing term in the denominator, so error-free sentences
contribute exactly zero correction loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..textdata import (
    PAD_ID,
    UNK_ID,
    EncodedExample,
    Vocab,
    encode_tokens,
    tokenize,
)
from .config import ModelConfig
from .layers import (
    _acc,
    encoder_layer_bwd,
    encoder_layer_fwd,
    layernorm_bwd,
    layernorm_fwd,
    gelu_bwd,
    gelu_fwd,
    linear_bwd,
    linear_fwd,
    log_softmax,
    softmax,
)

LOSS_EPS = 1e-5
INIT_STD = 0.02


# ---------------------------------------------------------------------------
# Parameters


def expected_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Shape of every learnable tensor; the tied output weight is word_emb."""
    cfg.validate()
    dw, dc, hw = cfg.d_word, cfg.char_hidden, cfg.word_hidden
    shapes: dict[str, tuple[int, ...]] = {
        "word_emb": (cfg.v_word, dw),
        "word_pos": (cfg.n_max, dw),
        "char_emb": (cfg.v_char, dc),
        "char_pos": (cfg.l_max, dc),
        "char.emb_ln.g": (dc,), "char.emb_ln.b": (dc,),
        "proj.W": (dw + dc, hw), "proj.b": (hw,),
        "emb_ln.g": (hw,), "emb_ln.b": (hw,),
        "detect.W1": (hw, hw), "detect.b1": (hw,),
        "detect.W2": (hw, 2), "detect.b2": (2,),
        "correct.W1": (hw, dw), "correct.b1": (dw,),
        "correct.b_out": (cfg.v_word,),
    }

    def layer(prefix: str, h: int) -> None:
        f = h * cfg.ffn_multiplier
        shapes.update({
            f"{prefix}.attn.Wq": (h, h), f"{prefix}.attn.bq": (h,),
            f"{prefix}.attn.Wk": (h, h), f"{prefix}.attn.bk": (h,),
            f"{prefix}.attn.Wv": (h, h), f"{prefix}.attn.bv": (h,),
            f"{prefix}.attn.Wo": (h, h), f"{prefix}.attn.bo": (h,),
            f"{prefix}.ln1.g": (h,), f"{prefix}.ln1.b": (h,),
            f"{prefix}.ffn.W1": (h, f), f"{prefix}.ffn.b1": (f,),
            f"{prefix}.ffn.W2": (f, h), f"{prefix}.ffn.b2": (h,),
            f"{prefix}.ln2.g": (h,), f"{prefix}.ln2.b": (h,),
        })

    for i in range(1 if cfg.share_layers else cfg.char_layers):
        layer(f"char.L{i}", dc)
    for i in range(1 if cfg.share_layers else cfg.word_layers):
        layer(f"word.L{i}", hw)
    return shapes


def _trunc_normal(rng: np.random.Generator, shape, std: float, dtype) -> np.ndarray:
    x = rng.normal(0.0, std, size=shape)
    for _ in range(8):
        bad = np.abs(x) > 2 * std
        if not bad.any():
            break
        x[bad] = rng.normal(0.0, std, size=int(bad.sum()))
    return np.clip(x, -2 * std, 2 * std).astype(dtype)


def init_params(cfg: ModelConfig, seed: int = 0, dtype=np.float32) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in expected_shapes(cfg).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "g":
            params[name] = np.ones(shape, dtype=dtype)
        elif leaf.startswith("b"):
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            params[name] = _trunc_normal(rng, shape, INIT_STD, dtype)
    return params


def param_census(params: dict[str, np.ndarray]) -> int:
    """Total learnable scalars; the tied correction weight counts once."""
    return int(sum(v.size for v in params.values()))


def _layer_prefix(stream: str, i: int, cfg: ModelConfig) -> str:
    return f"{stream}.L{0 if cfg.share_layers else i}"


# ---------------------------------------------------------------------------
# Forward


@dataclass
class ForwardOutput:
    detect_probs: np.ndarray   # (n, 2)
    correct_probs: np.ndarray  # (n, V_word)
    hidden: np.ndarray         # (n, word_hidden)


def _char_encode_batch(params, cfg: ModelConfig, char_ids: np.ndarray,
                       dropout_rate: float = 0.0, rng=None):
    """char_ids: (B, N, L) -> pooled (B, N, char_hidden) plus cache."""
    B, N, L = char_ids.shape
    dc = cfg.char_hidden
    flat_ids = char_ids.reshape(B * N, L)
    cmask = (flat_ids != PAD_ID).astype(params["char_emb"].dtype)
    x = params["char_emb"][flat_ids] + params["char_pos"][:L]
    x, c_ln = layernorm_fwd(x, params["char.emb_ln.g"], params["char.emb_ln.b"])
    layer_caches = []
    for i in range(cfg.char_layers):
        prefix = _layer_prefix("char", i, cfg)
        x, c = encoder_layer_fwd(x, params, prefix, cmask, cfg.char_heads,
                                 dropout_rate, rng)
        layer_caches.append(c)
    counts = cmask.sum(axis=1)
    if cfg.char_pool == "mean":
        denom = np.maximum(counts, 1.0)[:, None]
        pooled = (x * cmask[:, :, None]).sum(axis=1) / denom
        pool_cache = ("mean", cmask, denom)
    elif cfg.char_pool == "first":
        pooled = x[:, 0, :] * cmask[:, 0:1]
        pool_cache = ("first", cmask, None)
    else:  # max over real positions; empty rows stay zero
        masked = np.where(cmask[:, :, None] > 0, x, -np.inf)
        idx = masked.argmax(axis=1)
        pooled = np.take_along_axis(x, idx[:, None, :], axis=1)[:, 0, :]
        pooled = pooled * (counts > 0)[:, None]
        pool_cache = ("max", cmask, idx)
    cache = (flat_ids, cmask, c_ln, layer_caches, pool_cache, x.shape)
    return pooled.reshape(B, N, dc), cache


def _char_encode_bwd(dpooled, cache, params, cfg: ModelConfig, grads) -> None:
    flat_ids, cmask, c_ln, layer_caches, pool_cache, xshape = cache
    B_N, L, dc = xshape
    dpooled = dpooled.reshape(B_N, dc)
    kind, cmask, aux = pool_cache
    if kind == "mean":
        dx = (dpooled[:, None, :] / aux[:, None, :]) * cmask[:, :, None]
    elif kind == "first":
        dx = np.zeros(xshape, dtype=dpooled.dtype)
        dx[:, 0, :] = dpooled * cmask[:, 0:1]
    else:
        dx = np.zeros(xshape, dtype=dpooled.dtype)
        has = cmask.sum(axis=1) > 0
        contrib = dpooled * has[:, None]
        np.put_along_axis(dx, aux[:, None, :], contrib[:, None, :], axis=1)
    for i in reversed(range(cfg.char_layers)):
        prefix = _layer_prefix("char", i, cfg)
        dx = encoder_layer_bwd(dx, layer_caches[i], prefix, grads)
    dx, dg, db = layernorm_bwd(dx, c_ln)
    _acc(grads, "char.emb_ln.g", dg)
    _acc(grads, "char.emb_ln.b", db)
    demb = np.zeros_like(params["char_emb"])
    np.add.at(demb, flat_ids.reshape(-1), dx.reshape(-1, dc))
    _acc(grads, "char_emb", demb)
    dpos = np.zeros_like(params["char_pos"])
    dpos[:L] = dx.sum(axis=0)
    _acc(grads, "char_pos", dpos)


def forward_batch(params, cfg: ModelConfig, word_ids: np.ndarray,
                  char_ids: np.ndarray, attn_mask: np.ndarray,
                  train: bool = False, rng=None):
    """word_ids (B,N), char_ids (B,N,L), attn_mask (B,N).

    Returns (detect_logits, correct_logits, hidden, cache); the cache feeds
    the exact backward pass.
    """
    B, N = word_ids.shape
    rate = cfg.dropout_rate if train else 0.0
    wmask = attn_mask.astype(params["word_emb"].dtype)

    cpooled, c_char = _char_encode_batch(params, cfg, char_ids, rate, rng)
    wemb = params["word_emb"][word_ids] + params["word_pos"][:N]
    concat = np.concatenate([wemb, cpooled], axis=-1)
    x, c_proj = linear_fwd(concat, params["proj.W"], params["proj.b"])
    x, c_ln = layernorm_fwd(x, params["emb_ln.g"], params["emb_ln.b"])
    layer_caches = []
    for i in range(cfg.word_layers):
        prefix = _layer_prefix("word", i, cfg)
        x, c = encoder_layer_fwd(x, params, prefix, wmask, cfg.word_heads, rate, rng)
        layer_caches.append(c)
    hidden = x

    d1, c_d1 = linear_fwd(hidden, params["detect.W1"], params["detect.b1"])
    dg, c_dg = gelu_fwd(d1)
    detect_logits, c_d2 = linear_fwd(dg, params["detect.W2"], params["detect.b2"])

    g1, c_g1 = linear_fwd(hidden, params["correct.W1"], params["correct.b1"])
    gg, c_gg = gelu_fwd(g1)
    correct_logits = gg @ params["word_emb"].T + params["correct.b_out"]

    cache = (word_ids, c_char, c_proj, c_ln, layer_caches,
             c_d1, c_dg, c_d2, c_g1, c_gg, gg, N)
    return detect_logits, correct_logits, hidden, cache


def forward(example: EncodedExample, params, cfg: ModelConfig) -> ForwardOutput:
    """Single-example forward with softmax heads (dropout off)."""
    dl, cl, hidden, _ = forward_batch(
        params, cfg,
        example.word_ids[None, :], example.char_ids[None, :, :],
        example.attn_mask[None, :],
    )
    return ForwardOutput(softmax(dl[0]), softmax(cl[0]), hidden[0])


# ---------------------------------------------------------------------------
# Loss


@dataclass
class LossParts:
    total: float
    detect_part: float
    correct_part: float


def _loss_from_logprobs(detect_logp, correct_logp, detect_labels,
                        correct_labels, attn_mask) -> LossParts:
    """Batch mean of the per-sentence masked joint loss."""
    B = detect_labels.shape[0]
    detect_total = 0.0
    correct_total = 0.0
    for b in range(B):
        live = attn_mask[b] == 1
        n = float(live.sum())
        k = (detect_labels[b] == 1) & live
        e = float(k.sum())
        d_ll = detect_logp[b][live, detect_labels[b][live]].sum()
        detect_total += -d_ll / (n + LOSS_EPS)
        if e > 0:
            c_ll = correct_logp[b][k, correct_labels[b][k]].sum()
            correct_total += -c_ll / (e + LOSS_EPS)
    detect_part = detect_total / B
    correct_part = correct_total / B
    return LossParts(detect_part + correct_part, detect_part, correct_part)


def loss(output: ForwardOutput, example: EncodedExample) -> LossParts:
    """Joint masked loss of one example from head probabilities."""
    # -inf logs at off-label positions are never selected
    with np.errstate(divide="ignore"):
        detect_logp = np.log(output.detect_probs)
        correct_logp = np.log(output.correct_probs)
    return _loss_from_logprobs(
        detect_logp[None], correct_logp[None],
        example.detect_labels[None], example.correct_labels[None],
        example.attn_mask[None],
    )


def loss_and_grads(params, cfg: ModelConfig, word_ids, char_ids, attn_mask,
                   detect_labels, correct_labels, train: bool = False,
                   rng=None) -> tuple[LossParts, dict[str, np.ndarray]]:
    """Forward + exact backward over a batch; returns mean loss and grads."""
    detect_logits, correct_logits, hidden, cache = forward_batch(
        params, cfg, word_ids, char_ids, attn_mask, train, rng)
    B, N = word_ids.shape

    detect_logp = log_softmax(detect_logits)
    correct_logp = log_softmax(correct_logits)
    parts = _loss_from_logprobs(detect_logp, correct_logp, detect_labels,
                                correct_labels, attn_mask)

    dtype = detect_logits.dtype
    live = (attn_mask == 1)
    n_per = live.sum(axis=1).astype(dtype)
    k_mask = (detect_labels == 1) & live
    e_per = k_mask.sum(axis=1).astype(dtype)

    d_probs = np.exp(detect_logp)
    y_det = np.zeros_like(d_probs)
    rows = np.arange(N)
    for b in range(B):
        y_det[b, rows[live[b]], detect_labels[b][live[b]]] = 1.0
    d_detect_logits = (d_probs - y_det) * live[:, :, None]
    d_detect_logits /= (n_per + LOSS_EPS)[:, None, None]
    d_detect_logits /= B

    c_probs = np.exp(correct_logp)
    y_cor = np.zeros_like(c_probs)
    for b in range(B):
        y_cor[b, rows[k_mask[b]], correct_labels[b][k_mask[b]]] = 1.0
    d_correct_logits = (c_probs - y_cor) * k_mask[:, :, None]
    d_correct_logits /= (e_per + LOSS_EPS)[:, None, None]
    d_correct_logits /= B

    grads = backward_from_logit_grads(params, cfg, cache,
                                      d_detect_logits, d_correct_logits, hidden)
    return parts, grads


def backward_from_logit_grads(params, cfg: ModelConfig, cache,
                              d_detect_logits, d_correct_logits, hidden):
    (word_ids, c_char, c_proj, c_ln, layer_caches,
     c_d1, c_dg, c_d2, c_g1, c_gg, gg, N) = cache
    grads: dict[str, np.ndarray] = {}
    V, dw = params["word_emb"].shape

    # detection head
    ddg, dW2, db2 = linear_bwd(d_detect_logits, c_d2)
    _acc(grads, "detect.W2", dW2)
    _acc(grads, "detect.b2", db2)
    dd1 = gelu_bwd(ddg, c_dg)
    dh_detect, dW1, db1 = linear_bwd(dd1, c_d1)
    _acc(grads, "detect.W1", dW1)
    _acc(grads, "detect.b1", db1)

    # correction head: logits = gg @ word_emb.T + b_out (tied weight)
    dl2 = d_correct_logits.reshape(-1, V)
    gg2 = gg.reshape(-1, dw)
    _acc(grads, "word_emb", dl2.T @ gg2)
    _acc(grads, "correct.b_out", dl2.sum(axis=0))
    dgg = d_correct_logits @ params["word_emb"]
    dg1 = gelu_bwd(dgg, c_gg)
    dh_correct, dWc1, dbc1 = linear_bwd(dg1, c_g1)
    _acc(grads, "correct.W1", dWc1)
    _acc(grads, "correct.b1", dbc1)

    dx = dh_detect + dh_correct
    for i in reversed(range(cfg.word_layers)):
        prefix = _layer_prefix("word", i, cfg)
        dx = encoder_layer_bwd(dx, layer_caches[i], prefix, grads)
    dx, dg_ln, db_ln = layernorm_bwd(dx, c_ln)
    _acc(grads, "emb_ln.g", dg_ln)
    _acc(grads, "emb_ln.b", db_ln)
    dconcat, dWp, dbp = linear_bwd(dx, c_proj)
    _acc(grads, "proj.W", dWp)
    _acc(grads, "proj.b", dbp)

    dwemb = dconcat[..., :dw]
    dcpool = dconcat[..., dw:]
    demb = np.zeros_like(params["word_emb"])
    np.add.at(demb, word_ids.reshape(-1), dwemb.reshape(-1, dw))
    _acc(grads, "word_emb", demb)
    dpos = np.zeros_like(params["word_pos"])
    dpos[:N] = dwemb.sum(axis=0)
    _acc(grads, "word_pos", dpos)

    _char_encode_bwd(dcpool, c_char, params, cfg, grads)

    # every parameter gets an entry, zero where untouched
    for name, value in params.items():
        if name not in grads:
            grads[name] = np.zeros_like(value)
    return grads


def backward(example: EncodedExample, params, cfg: ModelConfig) -> dict[str, np.ndarray]:
    """Exact gradients of the joint loss for a single example."""
    parts, grads = loss_and_grads(
        params, cfg,
        example.word_ids[None], example.char_ids[None],
        example.attn_mask[None], example.detect_labels[None],
        example.correct_labels[None],
    )
    return grads


def char_encode(char_ids: np.ndarray, params, cfg: ModelConfig) -> np.ndarray:
    """Encode (n, l_max) character ids to one pooled vector per word."""
    pooled, _ = _char_encode_batch(params, cfg, char_ids[None])
    return pooled[0]


# ---------------------------------------------------------------------------
# Prediction


@dataclass
class Suggestion:
    word: str
    prob: float


@dataclass
class TokenPrediction:
    token: str
    is_error: bool
    p_error: float
    suggestions: list[Suggestion] = field(default_factory=list)


def predict_tokens(tokens: Sequence[str], params, cfg: ModelConfig,
                   word_vocab: Vocab, char_vocab: Vocab,
                   top_k: int = 3) -> list[TokenPrediction]:
    """Per-token error flags and ranked replacements.

    Token lists longer than n_max are processed in consecutive windows.
    Suggestions are only populated for flagged tokens and never contain
    PAD/UNK.
    """
    preds: list[TokenPrediction] = []
    for start in range(0, len(tokens), cfg.n_max):
        chunk = list(tokens[start:start + cfg.n_max])
        ex = encode_tokens(chunk, word_vocab, char_vocab, cfg.n_max, cfg.l_max)
        n = len(chunk)
        dl, cl, _, _ = forward_batch(
            params, cfg, ex.word_ids[None, :n], ex.char_ids[None, :n, :],
            ex.attn_mask[None, :n])
        detect_probs = softmax(dl[0])
        correct_probs = softmax(cl[0])
        for i, tok in enumerate(chunk):
            p_err = float(detect_probs[i, 1])
            flagged = p_err > 0.5
            suggestions: list[Suggestion] = []
            if flagged and top_k > 0:
                row = correct_probs[i].copy()
                row[PAD_ID] = 0.0
                row[UNK_ID] = 0.0
                k = min(top_k, len(row) - 2)
                top = np.argpartition(row, -k)[-k:]
                top = top[np.argsort(row[top])[::-1]]
                suggestions = [Suggestion(word_vocab.token_of(int(j)), float(row[j]))
                               for j in top if row[j] > 0.0]
            preds.append(TokenPrediction(tok, flagged, p_err, suggestions))
    return preds


def predict(text: str, params, cfg: ModelConfig, word_vocab: Vocab,
            char_vocab: Vocab, top_k: int = 3) -> list[TokenPrediction]:
    tokens = tokenize(text)
    if not tokens:
        return []
    return predict_tokens(tokens, params, cfg, word_vocab, char_vocab, top_k)
