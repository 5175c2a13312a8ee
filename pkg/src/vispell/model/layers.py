"""Numpy building blocks with hand-written backward passes.

Every *_fwd returns (output, cache); the matching *_bwd consumes the upstream
gradient plus that cache and returns gradients in the same order as the
forward inputs.  All functions preserve the dtype of their inputs, so the
same code runs in float32 for training and float64 for gradient checking.
"""

from __future__ import annotations

import numpy as np

LN_EPS = 1e-5
NEG_INF = -1e9  # finite so masked softmax stays well defined


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


# ---------------------------------------------------------------------------
# Linear


def linear_fwd(x, W, b):
    return x @ W + b, (x, W)


def linear_bwd(dy, cache):
    x, W = cache
    dx = dy @ W.T
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    dW = x2.T @ dy2
    db = dy2.sum(axis=0)
    return dx, dW, db


# ---------------------------------------------------------------------------
# LayerNorm (last axis)


def layernorm_fwd(x, gamma, beta):
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mean) * inv_std
    return xhat * gamma + beta, (xhat, inv_std, gamma)


def layernorm_bwd(dy, cache):
    xhat, inv_std, gamma = cache
    d = xhat.shape[-1]
    dxhat = dy * gamma
    dgamma = (dy * xhat).reshape(-1, d).sum(axis=0)
    dbeta = dy.reshape(-1, d).sum(axis=0)
    # standard closed form for the normalization jacobian
    dx = (dxhat - dxhat.mean(axis=-1, keepdims=True)
          - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)) * inv_std
    return dx, dgamma, dbeta


# ---------------------------------------------------------------------------
# GELU (tanh approximation)

_GELU_C = 0.7978845608028654  # sqrt(2/pi)


def gelu_fwd(x):
    x2 = x * x
    inner = _GELU_C * x * (1.0 + 0.044715 * x2)
    t = np.tanh(inner)
    return 0.5 * x * (1.0 + t), (x, x2, t)


def gelu_bwd(dy, cache):
    x, x2, t = cache
    dinner = _GELU_C * (1.0 + 3 * 0.044715 * x2)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner)


# ---------------------------------------------------------------------------
# Dropout (inverted scaling)


def dropout_fwd(x, rate: float, rng):
    if rate <= 0.0 or rng is None:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def dropout_bwd(dy, keep):
    if keep is None:
        return dy
    return dy * keep


# ---------------------------------------------------------------------------
# Multi-head self-attention


def mha_fwd(x, Wq, bq, Wk, bk, Wv, bv, Wo, bo, mask, n_heads: int):
    """x: (B, T, H); mask: (B, T) with 1 = attend, 0 = padding."""
    B, T, H = x.shape
    hd = H // n_heads

    def split(m):
        return m.reshape(B, T, n_heads, hd).transpose(0, 2, 1, 3)

    q = split(x @ Wq + bq)
    k = split(x @ Wk + bk)
    v = split(x @ Wv + bv)
    scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(hd)
    scores = scores + (1.0 - mask[:, None, None, :]) * NEG_INF
    attn = softmax(scores)
    ctx = attn @ v                                     # (B, nh, T, hd)
    merged = ctx.transpose(0, 2, 1, 3).reshape(B, T, H)
    out = merged @ Wo + bo
    cache = (x, q, k, v, attn, merged, Wq, Wk, Wv, Wo, n_heads)
    return out, cache


def mha_bwd(dout, cache):
    x, q, k, v, attn, merged, Wq, Wk, Wv, Wo, n_heads = cache
    B, T, H = x.shape
    hd = H // n_heads

    dWo = merged.reshape(-1, H).T @ dout.reshape(-1, H)
    dbo = dout.reshape(-1, H).sum(axis=0)
    dmerged = dout @ Wo.T
    dctx = dmerged.reshape(B, T, n_heads, hd).transpose(0, 2, 1, 3)

    dattn = dctx @ v.transpose(0, 1, 3, 2)
    dv = attn.transpose(0, 1, 3, 2) @ dctx
    dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
    dscores = dscores / np.sqrt(hd)
    dq = dscores @ k
    dk = dscores.transpose(0, 1, 3, 2) @ q

    def merge(m):
        return m.transpose(0, 2, 1, 3).reshape(B, T, H)

    dq, dk, dv = merge(dq), merge(dk), merge(dv)
    x2 = x.reshape(-1, H)
    dWq = x2.T @ dq.reshape(-1, H)
    dWk = x2.T @ dk.reshape(-1, H)
    dWv = x2.T @ dv.reshape(-1, H)
    dbq = dq.reshape(-1, H).sum(axis=0)
    dbk = dk.reshape(-1, H).sum(axis=0)
    dbv = dv.reshape(-1, H).sum(axis=0)
    dx = dq @ Wq.T + dk @ Wk.T + dv @ Wv.T
    return dx, dWq, dbq, dWk, dbk, dWv, dbv, dWo, dbo


# ---------------------------------------------------------------------------
# Post-LN transformer encoder layer


def encoder_layer_fwd(x, p, prefix: str, mask, n_heads: int,
                      dropout_rate: float = 0.0, rng=None):
    attn_out, c_attn = mha_fwd(
        x,
        p[f"{prefix}.attn.Wq"], p[f"{prefix}.attn.bq"],
        p[f"{prefix}.attn.Wk"], p[f"{prefix}.attn.bk"],
        p[f"{prefix}.attn.Wv"], p[f"{prefix}.attn.bv"],
        p[f"{prefix}.attn.Wo"], p[f"{prefix}.attn.bo"],
        mask, n_heads,
    )
    attn_out, drop1 = dropout_fwd(attn_out, dropout_rate, rng)
    h1, c_ln1 = layernorm_fwd(x + attn_out, p[f"{prefix}.ln1.g"], p[f"{prefix}.ln1.b"])
    f1, c_f1 = linear_fwd(h1, p[f"{prefix}.ffn.W1"], p[f"{prefix}.ffn.b1"])
    g1, c_g1 = gelu_fwd(f1)
    f2, c_f2 = linear_fwd(g1, p[f"{prefix}.ffn.W2"], p[f"{prefix}.ffn.b2"])
    f2, drop2 = dropout_fwd(f2, dropout_rate, rng)
    h2, c_ln2 = layernorm_fwd(h1 + f2, p[f"{prefix}.ln2.g"], p[f"{prefix}.ln2.b"])
    return h2, (c_attn, drop1, c_ln1, c_f1, c_g1, c_f2, drop2, c_ln2)


def encoder_layer_bwd(dh2, cache, prefix: str, grads):
    c_attn, drop1, c_ln1, c_f1, c_g1, c_f2, drop2, c_ln2 = cache

    dsum2, dg2, db2 = layernorm_bwd(dh2, c_ln2)
    _acc(grads, f"{prefix}.ln2.g", dg2)
    _acc(grads, f"{prefix}.ln2.b", db2)
    df2 = dropout_bwd(dsum2, drop2)
    dg1, dW2, db_f2 = linear_bwd(df2, c_f2)
    _acc(grads, f"{prefix}.ffn.W2", dW2)
    _acc(grads, f"{prefix}.ffn.b2", db_f2)
    df1 = gelu_bwd(dg1, c_g1)
    dh1_ffn, dW1, db_f1 = linear_bwd(df1, c_f1)
    _acc(grads, f"{prefix}.ffn.W1", dW1)
    _acc(grads, f"{prefix}.ffn.b1", db_f1)
    dh1 = dsum2 + dh1_ffn

    dsum1, dg_ln1, db_ln1 = layernorm_bwd(dh1, c_ln1)
    _acc(grads, f"{prefix}.ln1.g", dg_ln1)
    _acc(grads, f"{prefix}.ln1.b", db_ln1)
    dattn_out = dropout_bwd(dsum1, drop1)
    dx_attn, dWq, dbq, dWk, dbk, dWv, dbv, dWo, dbo = mha_bwd(dattn_out, c_attn)
    _acc(grads, f"{prefix}.attn.Wq", dWq)
    _acc(grads, f"{prefix}.attn.bq", dbq)
    _acc(grads, f"{prefix}.attn.Wk", dWk)
    _acc(grads, f"{prefix}.attn.bk", dbk)
    _acc(grads, f"{prefix}.attn.Wv", dWv)
    _acc(grads, f"{prefix}.attn.bv", dbv)
    _acc(grads, f"{prefix}.attn.Wo", dWo)
    _acc(grads, f"{prefix}.attn.bo", dbo)
    return dsum1 + dx_attn


def _acc(grads: dict, name: str, value: np.ndarray) -> None:
    # shared layers (and the tied embedding) see several contributions
    if name in grads:
        grads[name] = grads[name] + value
    else:
        grads[name] = value
