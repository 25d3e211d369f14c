"""Multi-head scaled dot-product self-attention over the temporal axis."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .layers import Layer, glorot_uniform, softmax


class MultiHeadAttention(Layer):
    """Self-attention on (B, L, d_model) with h heads of width d_model/h.

    Scores are scaled by 1/sqrt(d_k) and softmaxed per row; head outputs
    are concatenated and passed through the output projection.
    """

    def __init__(self, name: str, d_model: int, n_heads: int, rng: np.random.Generator):
        super().__init__(name)
        if d_model % n_heads != 0:
            raise ConfigError(f"d_model {d_model} not divisible by {n_heads} heads")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_k = d_model // n_heads
        self.w = {
            key: glorot_uniform(rng, (d_model, d_model), d_model, d_model)
            for key in ("q", "k", "v", "o")
        }
        self.b = {key: np.zeros(d_model) for key in ("q", "k", "v", "o")}
        self.dw = {key: np.zeros_like(self.w[key]) for key in self.w}
        self.db = {key: np.zeros_like(self.b[key]) for key in self.b}
        self._cache: dict | None = None
        self.last_attention: np.ndarray | None = None  # (B, h, L, L)

    def _split(self, x: np.ndarray) -> np.ndarray:
        b, length, _ = x.shape
        return x.reshape(b, length, self.n_heads, self.d_k).transpose(0, 2, 1, 3)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        b, _, length, _ = x.shape
        return x.transpose(0, 2, 1, 3).reshape(b, length, self.d_model)

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 3 and x.shape[2] == self.d_model,
                     f"expected (B, L, {self.d_model}), got {x.shape}")
        q = self._split(x @ self.w["q"] + self.b["q"])
        k = self._split(x @ self.w["k"] + self.b["k"])
        v = self._split(x @ self.w["v"] + self.b["v"])
        scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(self.d_k)
        attn = softmax(scores, axis=-1)
        ctx = self._merge(attn @ v)
        y = ctx @ self.w["o"] + self.b["o"]
        self._cache = {"x": x, "q": q, "k": k, "v": v, "attn": attn, "ctx": ctx}
        self.last_attention = attn
        return y

    def backward(self, grad):
        c = self._cache
        x, q, k, v, attn, ctx = c["x"], c["q"], c["k"], c["v"], c["attn"], c["ctx"]
        self.dw["o"] += ctx.reshape(-1, self.d_model).T @ grad.reshape(-1, self.d_model)
        self.db["o"] += grad.sum(axis=(0, 1))
        dctx = self._split(grad @ self.w["o"].T)

        dattn = dctx @ v.transpose(0, 1, 3, 2)
        dv = attn.transpose(0, 1, 3, 2) @ dctx
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dscores /= np.sqrt(self.d_k)
        dq = dscores @ k
        dk = dscores.transpose(0, 1, 3, 2) @ q

        dx = np.zeros_like(x)
        for key, dhead in (("q", dq), ("k", dk), ("v", dv)):
            flat = self._merge(dhead).reshape(-1, self.d_model)
            self.dw[key] += x.reshape(-1, self.d_model).T @ flat
            self.db[key] += flat.sum(axis=0)
            dx += (flat @ self.w[key].T).reshape(x.shape)
        return dx

    def params(self):
        out = {}
        for key in ("q", "k", "v", "o"):
            out[f"{self.name}.w{key}"] = self.w[key]
            out[f"{self.name}.b{key}"] = self.b[key]
        return out

    def grads(self):
        out = {}
        for key in ("q", "k", "v", "o"):
            out[f"{self.name}.w{key}"] = self.dw[key]
            out[f"{self.name}.b{key}"] = self.db[key]
        return out
