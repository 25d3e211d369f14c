"""Neural-network layers with explicit reverse-mode gradients.

Everything is float64 numpy. Conv layers use the (B, C, H, W) layout;
for EEG epochs H is the electrode axis and W the time axis. Every layer
caches what its backward pass needs during forward; backward must be
called after forward with matching ``training`` mode.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError


class ShapeError(ConfigError):
    """Input shape incompatible with a layer."""


class Layer:
    """Base layer: parameter-free identity."""

    def __init__(self, name: str):
        self.name = name

    def forward(self, x: np.ndarray, training: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def grads(self) -> dict[str, np.ndarray]:
        return {}

    def _expect(self, cond: bool, msg: str) -> None:
        if not cond:
            raise ShapeError(f"layer {self.name}: {msg}")


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense(Layer):
    def __init__(self, name: str, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__(name)
        self.in_features = in_features
        self.out_features = out_features
        self.w = glorot_uniform(rng, (in_features, out_features), in_features, out_features)
        self.b = np.zeros(out_features)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 2 and x.shape[1] == self.in_features,
                     f"expected (B, {self.in_features}), got {x.shape}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, grad):
        self.dw += self._x.T @ grad
        self.db += grad.sum(axis=0)
        return grad @ self.w.T

    def params(self):
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}

    def grads(self):
        return {f"{self.name}.w": self.dw, f"{self.name}.b": self.db}


class Conv2d(Layer):
    """Full 2-D convolution (stride 1) with explicit symmetric padding."""

    def __init__(self, name, in_channels, out_channels, kernel, padding, rng, bias=False):
        super().__init__(name)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kh, self.kw = kernel
        self.ph, self.pw = padding
        fan_in = in_channels * self.kh * self.kw
        fan_out = out_channels * self.kh * self.kw
        self.w = glorot_uniform(rng, (out_channels, in_channels, self.kh, self.kw), fan_in, fan_out)
        self.b = np.zeros(out_channels) if bias else None
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b) if bias else None
        self._cols: np.ndarray | None = None
        self._xshape: tuple | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 4 and x.shape[1] == self.in_channels,
                     f"expected (B, {self.in_channels}, H, W), got {x.shape}")
        b, _, h, w = x.shape
        ho = h + 2 * self.ph - self.kh + 1
        wo = w + 2 * self.pw - self.kw + 1
        self._expect(ho >= 1 and wo >= 1, f"kernel ({self.kh}, {self.kw}) larger than padded input")
        xp = np.pad(x, ((0, 0), (0, 0), (self.ph, self.ph), (self.pw, self.pw)))
        win = sliding_window_view(xp, (self.kh, self.kw), axis=(2, 3))  # (B, C, Ho, Wo, kh, kw)
        cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(b * ho * wo, -1)
        self._cols = cols
        self._xshape = x.shape
        y = cols @ self.w.reshape(self.out_channels, -1).T
        y = y.reshape(b, ho, wo, self.out_channels).transpose(0, 3, 1, 2)
        if self.b is not None:
            y = y + self.b[:, None, None]
        return y

    def backward(self, grad):
        b, _, ho, wo = grad.shape
        gcols = grad.transpose(0, 2, 3, 1).reshape(b * ho * wo, self.out_channels)
        self.dw += (gcols.T @ self._cols).reshape(self.w.shape)
        if self.b is not None:
            self.db += grad.sum(axis=(0, 2, 3))
        dcols = gcols @ self.w.reshape(self.out_channels, -1)
        dcols = dcols.reshape(b, ho, wo, self.in_channels, self.kh, self.kw)
        _, _, h, w = self._xshape
        dxp = np.zeros((b, self.in_channels, h + 2 * self.ph, w + 2 * self.pw))
        for i in range(self.kh):
            for j in range(self.kw):
                dxp[:, :, i : i + ho, j : j + wo] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        return dxp[:, :, self.ph : self.ph + h, self.pw : self.pw + w]

    def params(self):
        p = {f"{self.name}.w": self.w}
        if self.b is not None:
            p[f"{self.name}.b"] = self.b
        return p

    def grads(self):
        g = {f"{self.name}.w": self.dw}
        if self.b is not None:
            g[f"{self.name}.b"] = self.db
        return g


class DepthwiseConv2d(Layer):
    """Per-channel convolution with a depth multiplier (stride 1)."""

    def __init__(self, name, in_channels, depth_mult, kernel, padding, rng):
        super().__init__(name)
        self.in_channels = in_channels
        self.depth_mult = depth_mult
        self.kh, self.kw = kernel
        self.ph, self.pw = padding
        k = self.kh * self.kw
        self.w = glorot_uniform(rng, (in_channels, depth_mult, self.kh, self.kw), k, depth_mult * k)
        self.dw = np.zeros_like(self.w)
        self._win: np.ndarray | None = None
        self._xshape: tuple | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 4 and x.shape[1] == self.in_channels,
                     f"expected (B, {self.in_channels}, H, W), got {x.shape}")
        b, c, h, w = x.shape
        ho = h + 2 * self.ph - self.kh + 1
        wo = w + 2 * self.pw - self.kw + 1
        self._expect(ho >= 1 and wo >= 1, f"kernel ({self.kh}, {self.kw}) larger than padded input")
        xp = np.pad(x, ((0, 0), (0, 0), (self.ph, self.ph), (self.pw, self.pw)))
        win = sliding_window_view(xp, (self.kh, self.kw), axis=(2, 3))
        self._win = win
        self._xshape = x.shape
        y = np.einsum("bchwij,cdij->bcdhw", win, self.w, optimize=True)
        return y.reshape(b, c * self.depth_mult, ho, wo)

    def backward(self, grad):
        b, _, ho, wo = grad.shape
        g = grad.reshape(b, self.in_channels, self.depth_mult, ho, wo)
        self.dw += np.einsum("bchwij,bcdhw->cdij", self._win, g, optimize=True)
        _, _, h, w = self._xshape
        dxp = np.zeros((b, self.in_channels, h + 2 * self.ph, w + 2 * self.pw))
        for i in range(self.kh):
            for j in range(self.kw):
                dxp[:, :, i : i + ho, j : j + wo] += np.einsum(
                    "bcdhw,cd->bchw", g, self.w[:, :, i, j], optimize=True
                )
        return dxp[:, :, self.ph : self.ph + h, self.pw : self.pw + w]

    def params(self):
        return {f"{self.name}.w": self.w}

    def grads(self):
        return {f"{self.name}.w": self.dw}


class BatchNorm2d(Layer):
    """Per-map batch normalization over (B, H, W)."""

    def __init__(self, name, channels, momentum=0.1, eps=1e-5):
        super().__init__(name)
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = np.ones(channels)
        self.beta = np.zeros(channels)
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self._cache: tuple | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 4 and x.shape[1] == self.channels,
                     f"expected (B, {self.channels}, H, W), got {x.shape}")
        axes = (0, 2, 3)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[:, None, None]) * inv_std[:, None, None]
        self._cache = (xhat, inv_std, training, x.shape)
        return self.gamma[:, None, None] * xhat + self.beta[:, None, None]

    def backward(self, grad):
        xhat, inv_std, training, shape = self._cache
        axes = (0, 2, 3)
        self.dgamma += (grad * xhat).sum(axis=axes)
        self.dbeta += grad.sum(axis=axes)
        gg = grad * self.gamma[:, None, None]
        if not training:
            return gg * inv_std[:, None, None]
        n = shape[0] * shape[2] * shape[3]
        mean_gg = gg.mean(axis=axes)
        mean_gg_xhat = (gg * xhat).mean(axis=axes)
        return inv_std[:, None, None] * (
            gg - mean_gg[:, None, None] - xhat * mean_gg_xhat[:, None, None]
        )

    def params(self):
        return {f"{self.name}.gamma": self.gamma, f"{self.name}.beta": self.beta}

    def grads(self):
        return {f"{self.name}.gamma": self.dgamma, f"{self.name}.beta": self.dbeta}


class Elu(Layer):
    def __init__(self, name, alpha=1.0):
        super().__init__(name)
        self.alpha = alpha
        self._cache: tuple | None = None

    def forward(self, x, training=False, rng=None):
        y = np.where(x > 0, x, self.alpha * np.expm1(np.minimum(x, 0.0)))
        self._cache = (x > 0, y)
        return y

    def backward(self, grad):
        pos, y = self._cache
        return grad * np.where(pos, 1.0, y + self.alpha)


class AvgPool2d(Layer):
    """Non-overlapping average pooling; trailing remainders are cropped."""

    def __init__(self, name, pool: tuple[int, int]):
        super().__init__(name)
        self.ph, self.pw = pool
        self._xshape: tuple | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 4, f"expected 4-D input, got {x.shape}")
        b, c, h, w = x.shape
        ho, wo = h // self.ph, w // self.pw
        self._expect(ho >= 1 and wo >= 1, f"pool ({self.ph}, {self.pw}) larger than input {x.shape}")
        self._xshape = x.shape
        xc = x[:, :, : ho * self.ph, : wo * self.pw]
        return xc.reshape(b, c, ho, self.ph, wo, self.pw).mean(axis=(3, 5))

    def backward(self, grad):
        b, c, h, w = self._xshape
        ho, wo = grad.shape[2], grad.shape[3]
        dx = np.zeros((b, c, h, w))
        expanded = np.repeat(np.repeat(grad, self.ph, axis=2), self.pw, axis=3)
        dx[:, :, : ho * self.ph, : wo * self.pw] = expanded / (self.ph * self.pw)
        return dx


class Dropout(Layer):
    """Inverted dropout: active only in training mode."""

    def __init__(self, name, rate):
        super().__init__(name)
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._mask: np.ndarray | None = None

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ConfigError(f"layer {self.name}: training-mode dropout needs an rng")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            return grad
        return grad * self._mask


class Flatten(Layer):
    def __init__(self, name):
        super().__init__(name)
        self._xshape: tuple | None = None

    def forward(self, x, training=False, rng=None):
        self._xshape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._xshape)


class ToSequence(Layer):
    """(B, C, 1, W) feature maps -> (B, W, C) sequence for attention."""

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 4 and x.shape[2] == 1, f"expected (B, C, 1, W), got {x.shape}")
        return x[:, :, 0, :].transpose(0, 2, 1)

    def backward(self, grad):
        return grad.transpose(0, 2, 1)[:, :, None, :]


class MeanPoolSequence(Layer):
    """(B, L, D) -> (B, D) by averaging over positions."""

    def __init__(self, name):
        super().__init__(name)
        self._length: int | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 3, f"expected (B, L, D), got {x.shape}")
        self._length = x.shape[1]
        return x.mean(axis=1)

    def backward(self, grad):
        return np.repeat(grad[:, None, :], self._length, axis=1) / self._length


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    zs = z - z.max(axis=axis, keepdims=True)
    e = np.exp(zs)
    return e / e.sum(axis=axis, keepdims=True)


class Softmax(Layer):
    """Final class-probability layer (rows sum to 1)."""

    def __init__(self, name):
        super().__init__(name)
        self._y: np.ndarray | None = None

    def forward(self, x, training=False, rng=None):
        self._expect(x.ndim == 2, f"expected (B, K) logits, got {x.shape}")
        self._y = softmax(x, axis=-1)
        return self._y

    def backward(self, grad):
        y = self._y
        return y * (grad - (grad * y).sum(axis=-1, keepdims=True))
