"""Minimal neural-network engine with hand-derived gradients.

Only the layer kinds the classifiers need: valid 1-D convolution, max
pooling, flatten, dense, and a masked GRU. All layers operate on a leading
batch axis; gradients from a backward pass are summed over the batch and
divided by the batch size by the loss, so sgd averages over the batch.

Conventions (frozen): valid padding, stride 1 convolutions; pool stride =
pool size with the trailing remainder dropped; max-pool ties break to the
lowest index; initialization is uniform in +/-sqrt(6/(fan_in+fan_out)) with
zero biases.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParseError, ShapeError, ValidationError


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _glorot_uniform(rng: np.random.Generator, shape, fan_in: int,
                    fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Conv1D:
    """Valid cross-correlation, stride 1, optional tanh."""

    kind = "conv1d"

    def __init__(self, filters: int, kernel_size: int, in_channels: int,
                 activation: str = "linear"):
        if kernel_size < 1 or filters < 1:
            raise ValidationError("filters and kernel_size must be >= 1")
        if activation not in ("linear", "tanh"):
            raise ValidationError(f"unsupported activation {activation!r}")
        self.filters = filters
        self.kernel_size = kernel_size
        self.in_channels = in_channels
        self.activation = activation
        self.W = np.zeros((filters, in_channels, kernel_size))
        self.b = np.zeros(filters)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def init(self, rng: np.random.Generator) -> None:
        fan_in = self.in_channels * self.kernel_size
        fan_out = self.filters * self.kernel_size
        self.W = _glorot_uniform(rng, self.W.shape, fan_in, fan_out)
        self.b = np.zeros(self.filters)

    def output_length(self, length: int) -> int:
        if length < self.kernel_size:
            raise ShapeError(
                f"conv1d needs input length >= {self.kernel_size}, "
                f"got {length}")
        return length - self.kernel_size + 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 3 or x.shape[1] != self.in_channels:
            raise ShapeError(
                f"conv1d expects (batch, {self.in_channels}, L), "
                f"got {x.shape}")
        self.output_length(x.shape[2])
        windows = sliding_window_view(x, self.kernel_size, axis=2)
        z = np.einsum("fck,bclk->bfl", self.W, windows, optimize=True) + self.b[:, None]
        y = np.tanh(z) if self.activation == "tanh" else z
        self._cache = (windows, y)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        windows, y = self._cache
        dz = dy * (1.0 - y * y) if self.activation == "tanh" else dy
        self.dW = np.einsum("bfl,bcli->fci", dz, windows, optimize=True)
        self.db = dz.sum(axis=(0, 2))
        k = self.kernel_size
        dz_padded = np.pad(dz, ((0, 0), (0, 0), (k - 1, k - 1)))
        dz_windows = sliding_window_view(dz_padded, k, axis=2)
        return np.einsum("bflj,fcj->bcl", dz_windows, self.W[:, :, ::-1],
                         optimize=True)

    def params(self):
        return [("W", self.W, self.dW), ("b", self.b, self.db)]

    def spec(self) -> dict:
        return {"kind": self.kind, "filters": self.filters,
                "kernel_size": self.kernel_size,
                "in_channels": self.in_channels,
                "activation": self.activation}


class MaxPool1D:
    """Non-overlapping max pooling; remainder positions are dropped."""

    kind = "maxpool1d"

    def __init__(self, pool_size: int):
        if pool_size < 1:
            raise ValidationError("pool_size must be >= 1")
        self.pool_size = pool_size
        self._cache = None

    def init(self, rng) -> None:
        pass

    def output_length(self, length: int) -> int:
        if length < self.pool_size:
            raise ShapeError(
                f"maxpool1d needs input length >= {self.pool_size}, "
                f"got {length}")
        return length // self.pool_size

    def forward(self, x: np.ndarray) -> np.ndarray:
        batch, channels, length = x.shape
        out_len = self.output_length(length)
        trimmed = x[:, :, :out_len * self.pool_size]
        blocks = trimmed.reshape(batch, channels, out_len, self.pool_size)
        argmax = blocks.argmax(axis=3)
        y = np.take_along_axis(blocks, argmax[..., None], axis=3)[..., 0]
        self._cache = (x.shape, argmax)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        in_shape, argmax = self._cache
        batch, channels, length = in_shape
        out_len = dy.shape[2]
        dblocks = np.zeros((batch, channels, out_len, self.pool_size))
        np.put_along_axis(dblocks, argmax[..., None], dy[..., None], axis=3)
        dx = np.zeros(in_shape)
        dx[:, :, :out_len * self.pool_size] = dblocks.reshape(
            batch, channels, -1)
        return dx

    def params(self):
        return []

    def spec(self) -> dict:
        return {"kind": self.kind, "pool_size": self.pool_size}


class Flatten:
    kind = "flatten"

    def __init__(self):
        self._shape = None

    def init(self, rng) -> None:
        pass

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return dy.reshape(self._shape)

    def params(self):
        return []

    def spec(self) -> dict:
        return {"kind": self.kind}


class Dense:
    """Affine map with optional sigmoid."""

    kind = "dense"

    def __init__(self, units: int, in_features: int,
                 activation: str = "linear"):
        if activation not in ("linear", "sigmoid"):
            raise ValidationError(f"unsupported activation {activation!r}")
        self.units = units
        self.in_features = in_features
        self.activation = activation
        self.W = np.zeros((units, in_features))
        self.b = np.zeros(units)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def init(self, rng: np.random.Generator) -> None:
        self.W = _glorot_uniform(rng, self.W.shape, self.in_features,
                                 self.units)
        self.b = np.zeros(self.units)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(
                f"dense expects (batch, {self.in_features}), got {x.shape}")
        z = x @ self.W.T + self.b
        y = sigmoid(z) if self.activation == "sigmoid" else z
        self._cache = (x, z, y)
        return y

    @property
    def preactivation(self) -> np.ndarray:
        return self._cache[1]

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x, _, y = self._cache
        if self.activation == "sigmoid":
            dz = dy * y * (1.0 - y)
        else:
            dz = dy
        return self._backward_from_preact(dz, x)

    def backward_preact(self, dz: np.ndarray) -> np.ndarray:
        """Backward given the gradient w.r.t. the pre-activation.

        Used by the loss head, which folds the sigmoid derivative into the
        cross-entropy gradient for numerical stability.
        """
        x = self._cache[0]
        return self._backward_from_preact(dz, x)

    def _backward_from_preact(self, dz, x):
        self.dW = dz.T @ x
        self.db = dz.sum(axis=0)
        return dz @ self.W

    def params(self):
        return [("W", self.W, self.dW), ("b", self.b, self.db)]

    def spec(self) -> dict:
        return {"kind": self.kind, "units": self.units,
                "in_features": self.in_features,
                "activation": self.activation}


class GRU:
    """GRU over a masked sequence, honoring right padding.

    Timesteps carry `input_size` scalars (1 = plain scalar sequence). Steps
    whose mask is 0 copy the hidden state unchanged; steps where the whole
    batch is masked are skipped outright. Weights act on the concatenation
    [h_prev, x_t], so each matrix is (H, H+input_size).
    """

    kind = "gru"

    def __init__(self, hidden_size: int, input_size: int = 1):
        if hidden_size < 1:
            raise ValidationError("hidden_size must be >= 1")
        if input_size < 1:
            raise ValidationError("input_size must be >= 1")
        self.hidden_size = hidden_size
        self.input_size = input_size
        h, k = hidden_size, input_size
        self.Wz = np.zeros((h, h + k))
        self.Wr = np.zeros((h, h + k))
        self.Wh = np.zeros((h, h + k))
        self.bz = np.zeros(h)
        self.br = np.zeros(h)
        self.bh = np.zeros(h)
        self.dWz = np.zeros_like(self.Wz)
        self.dWr = np.zeros_like(self.Wr)
        self.dWh = np.zeros_like(self.Wh)
        self.dbz = np.zeros_like(self.bz)
        self.dbr = np.zeros_like(self.br)
        self.dbh = np.zeros_like(self.bh)
        self._cache = None

    def init(self, rng: np.random.Generator) -> None:
        h, k = self.hidden_size, self.input_size
        for name in ("Wz", "Wr", "Wh"):
            setattr(self, name, _glorot_uniform(rng, (h, h + k), h + k, h))
        self.bz = np.zeros(h)
        self.br = np.zeros(h)
        self.bh = np.zeros(h)

    @staticmethod
    def validate_mask(mask: np.ndarray) -> None:
        if mask.ndim == 1:
            mask = mask[None, :]
        if np.any(mask[:, 1:] > mask[:, :-1]):
            raise ValidationError(
                "mask must be a prefix of 1s followed by 0s")

    def forward(self, x: np.ndarray, mask: np.ndarray) -> np.ndarray:
        if x.ndim == 2:
            if self.input_size != 1:
                raise ShapeError(
                    f"gru with input_size {self.input_size} expects "
                    f"(batch, T, {self.input_size}), got {x.shape}")
            x = x[:, :, None]
        if x.ndim != 3 or x.shape[2] != self.input_size:
            raise ShapeError(
                f"gru expects (batch, T, {self.input_size}), got {x.shape}")
        if mask.shape != x.shape[:2]:
            raise ShapeError("mask shape must match the sequence steps")
        self.validate_mask(mask)
        batch, steps = x.shape[:2]
        h = np.zeros((batch, self.hidden_size))
        cache = []
        mask = mask.astype(np.float64)
        for t in range(steps):
            m = mask[:, t:t + 1]
            if not m.any():
                cache.append(None)
                continue
            h_prev = h
            xt = x[:, t, :]
            cat = np.concatenate([h_prev, xt], axis=1)
            z = sigmoid(cat @ self.Wz.T + self.bz)
            r = sigmoid(cat @ self.Wr.T + self.br)
            cat_h = np.concatenate([r * h_prev, xt], axis=1)
            h_cand = np.tanh(cat_h @ self.Wh.T + self.bh)
            h_new = (1.0 - z) * h_prev + z * h_cand
            h = m * h_new + (1.0 - m) * h_prev
            cache.append((m, h_prev, cat, cat_h, z, r, h_cand))
        self._cache = cache
        return h

    def backward(self, dh: np.ndarray) -> None:
        self.dWz = np.zeros_like(self.Wz)
        self.dWr = np.zeros_like(self.Wr)
        self.dWh = np.zeros_like(self.Wh)
        self.dbz = np.zeros_like(self.bz)
        self.dbr = np.zeros_like(self.br)
        self.dbh = np.zeros_like(self.bh)
        hidden = self.hidden_size
        for entry in reversed(self._cache):
            if entry is None:
                continue
            m, h_prev, cat, cat_h, z, r, h_cand = entry
            dh_step = dh * m
            dh_prev = dh * (1.0 - m) + dh_step * (1.0 - z)

            dz = dh_step * (h_cand - h_prev)
            dcand = dh_step * z

            da_h = dcand * (1.0 - h_cand * h_cand)
            self.dWh += da_h.T @ cat_h
            self.dbh += da_h.sum(axis=0)
            dcat_h = da_h @ self.Wh
            dr = dcat_h[:, :hidden] * h_prev
            dh_prev = dh_prev + dcat_h[:, :hidden] * r

            da_z = dz * z * (1.0 - z)
            self.dWz += da_z.T @ cat
            self.dbz += da_z.sum(axis=0)
            da_r = dr * r * (1.0 - r)
            self.dWr += da_r.T @ cat
            self.dbr += da_r.sum(axis=0)

            dcat = da_z @ self.Wz + da_r @ self.Wr
            dh = dh_prev + dcat[:, :hidden]
        # Inputs are raw features; no upstream layer consumes their gradient.

    def params(self):
        return [("Wz", self.Wz, self.dWz), ("Wr", self.Wr, self.dWr),
                ("Wh", self.Wh, self.dWh), ("bz", self.bz, self.dbz),
                ("br", self.br, self.dbr), ("bh", self.bh, self.dbh)]

    def spec(self) -> dict:
        return {"kind": self.kind, "hidden_size": self.hidden_size,
                "input_size": self.input_size}


class Network:
    """An ordered layer chain ending in a 1-unit sigmoid head."""

    def __init__(self, layers: list, arch: str, input_len: int, seed: int):
        self.layers = layers
        self.arch = arch
        self.input_len = input_len
        self.seed = seed

    def initialize(self) -> None:
        rng = np.random.default_rng(self.seed)
        for layer in self.layers:
            layer.init(rng)

    @property
    def uses_mask(self) -> bool:
        return any(isinstance(layer, GRU) for layer in self.layers)

    def forward(self, x: np.ndarray,
                mask: np.ndarray | None = None) -> np.ndarray:
        """Probabilities in (0, 1), one per batch row."""
        if x.ndim != 2 or x.shape[1] != self.input_len:
            raise ShapeError(
                f"expected input of length {self.input_len}, got {x.shape}")
        out = x
        for layer in self.layers:
            if isinstance(layer, GRU):
                if mask is None:
                    raise ValidationError("this network requires a mask")
                step = layer.input_size
                if step > 1:
                    # Chunk the flat vector into vector timesteps; a chunk
                    # counts as real if any of its entries is real.
                    batch, length = out.shape
                    if length % step:
                        raise ShapeError(
                            f"input length {length} not divisible by the "
                            f"gru step size {step}")
                    out = out.reshape(batch, length // step, step)
                    mask = mask.reshape(batch, length // step, step).max(
                        axis=2)
                out = layer.forward(out, mask)
            elif isinstance(layer, Conv1D) and out.ndim == 2:
                out = layer.forward(out[:, None, :])
            else:
                out = layer.forward(out)
        return out[:, 0]

    def loss_and_backward(self, x: np.ndarray, mask: np.ndarray | None,
                          targets: np.ndarray) -> tuple[float, np.ndarray]:
        """Mean binary cross-entropy and its gradients (stored per layer).

        The loss is computed from the head's pre-activation, so it stays
        finite for saturated predictions.
        """
        probs = self.forward(x, mask)
        head = self.layers[-1]
        logits = head.preactivation[:, 0]
        losses = np.logaddexp(0.0, logits) - targets * logits
        loss = float(losses.mean())

        batch = x.shape[0]
        dz = ((probs - targets) / batch)[:, None]
        grad = head.backward_preact(dz)
        for layer in reversed(self.layers[:-1]):
            grad = layer.backward(grad)
        return loss, probs

    def sgd_step(self, learning_rate: float) -> None:
        for layer in self.layers:
            for _, value, grad in layer.params():
                if value.shape != grad.shape:
                    raise ShapeError("parameter/gradient shape mismatch")
                value -= learning_rate * grad

    def parameter_tensors(self) -> list[tuple[int, str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            for name, value, _ in layer.params():
                out.append((i, name, value))
        return out


# ---------------------------------------------------------------------------
# Parameter serialization: versioned text, tensors row-major at 17
# significant digits.

_FORMAT_TAG = "aae-net-v1"

_LAYER_BUILDERS = {
    "conv1d": lambda s: Conv1D(s["filters"], s["kernel_size"],
                               s["in_channels"], s["activation"]),
    "maxpool1d": lambda s: MaxPool1D(s["pool_size"]),
    "flatten": lambda s: Flatten(),
    "dense": lambda s: Dense(s["units"], s["in_features"], s["activation"]),
    "gru": lambda s: GRU(s["hidden_size"], s.get("input_size", 1)),
}


def save_network(net: Network, path) -> None:
    import json

    with open(path, "w") as fh:
        fh.write(f"{_FORMAT_TAG}\n")
        fh.write(json.dumps({
            "arch": net.arch,
            "input_len": net.input_len,
            "seed": net.seed,
            "layers": [layer.spec() for layer in net.layers],
        }, separators=(",", ":")) + "\n")
        for layer_idx, name, value in net.parameter_tensors():
            dims = " ".join(str(d) for d in value.shape)
            fh.write(f"tensor {layer_idx} {name} {dims}\n")
            fh.write(" ".join(f"{v:.17g}" for v in value.ravel()) + "\n")


def load_network(path) -> Network:
    import json

    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _FORMAT_TAG:
        raise ParseError(f"not an {_FORMAT_TAG} file", line=1)
    try:
        header = json.loads(lines[1])
        layers = [_LAYER_BUILDERS[s["kind"]](s) for s in header["layers"]]
    except (IndexError, KeyError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad network header: {exc}", line=2) from exc
    net = Network(layers, arch=header["arch"], input_len=header["input_len"],
                  seed=header["seed"])

    idx = 2
    lineno = 3
    while idx < len(lines):
        parts = lines[idx].split()
        if not parts:
            idx += 1
            lineno += 1
            continue
        if parts[0] != "tensor" or len(parts) < 3:
            raise ParseError(f"expected tensor header, got {lines[idx]!r}",
                             line=lineno)
        layer_idx = int(parts[1])
        name = parts[2]
        shape = tuple(int(d) for d in parts[3:])
        values = np.array([float(v) for v in lines[idx + 1].split()])
        if values.size != int(np.prod(shape)):
            raise ParseError(
                f"tensor {name} expects {int(np.prod(shape))} values, "
                f"got {values.size}", line=lineno + 1)
        target = getattr(net.layers[layer_idx], name)
        target[...] = values.reshape(shape)
        idx += 2
        lineno += 2
    return net
