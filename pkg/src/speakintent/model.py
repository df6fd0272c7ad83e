"""Residual 1-D convolutional binary classifier, implemented on numpy.

Three same-padded conv blocks with kernel sizes 3, 5 and 7, each wrapped
in a skip connection (a 1-wide projection where the channel count
changes, identity elsewhere) and a rectifier, then global average
pooling over time and an affine head producing a single logit.  Forward
and backward passes are written out explicitly so gradients can be
verified against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .accel import WindowTensor
from .errors import DataFormatError
from .evaluation import roc_auc
from .seeding import rng_for

KERNEL_SIZES = (3, 5, 7)
IN_CHANNELS = 3
CHECKPOINT_FORMAT = "speakintent-rcnet"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    folds: int = 3
    epochs: int = 10
    learning_rate: float = 1e-3
    seed: int = 0
    channels: int = 32

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    """(B, C, N) -> (B*N, C*k) patches under same-padding."""
    b, c, n = x.shape
    pad = (k - 1) // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    windows = np.lib.stride_tricks.sliding_window_view(xp, k, axis=2)  # (B, C, N, k)
    return windows.transpose(0, 2, 1, 3).reshape(b * n, c * k)


def _col2im(dcols: np.ndarray, shape: tuple[int, int, int], k: int) -> np.ndarray:
    """Adjoint of _im2col: scatter (B*N, C*k) gradients back to (B, C, N)."""
    b, c, n = shape
    pad = (k - 1) // 2
    d = dcols.reshape(b, n, c, k).transpose(0, 2, 1, 3)  # (B, C, N, k)
    dxp = np.zeros((b, c, n + 2 * pad))
    for j in range(k):
        dxp[:, :, j : j + n] += d[:, :, :, j]
    return dxp[:, :, pad : pad + n]


class ResidualConvNet:
    """Parameter container plus explicit forward/backward passes."""

    def __init__(self, channels: int = 32, seed: int | None = None):
        if channels < 1:
            raise ValueError("channels must be >= 1")
        self.channels = channels
        self.seed = seed
        c = channels
        k1, k2, k3 = KERNEL_SIZES
        self.params: dict[str, np.ndarray] = {
            "block1_conv_w": np.zeros((c, IN_CHANNELS, k1)),
            "block1_conv_b": np.zeros(c),
            "block1_proj_w": np.zeros((c, IN_CHANNELS, 1)),
            "block1_proj_b": np.zeros(c),
            "block2_conv_w": np.zeros((c, c, k2)),
            "block2_conv_b": np.zeros(c),
            "block3_conv_w": np.zeros((c, c, k3)),
            "block3_conv_b": np.zeros(c),
            "head_w": np.zeros(c),
            "head_b": np.zeros(1),
        }

    # -- architecture bookkeeping -------------------------------------

    def param_shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        return [(name, tuple(arr.shape)) for name, arr in self.params.items()]

    def param_count(self) -> int:
        return sum(arr.size for arr in self.params.values())

    # -- forward / backward -------------------------------------------

    def _conv_forward(self, x, w, b):
        cout, cin, k = w.shape
        bsz, _, n = x.shape
        cols = _im2col(x, k)
        y2 = cols @ w.reshape(cout, cin * k).T
        y = y2.reshape(bsz, n, cout).transpose(0, 2, 1) + b[None, :, None]
        return y, cols

    def _conv_backward(self, dy, cols, w, x_shape):
        cout, cin, k = w.shape
        bsz, _, n = x_shape
        dy2 = dy.transpose(0, 2, 1).reshape(bsz * n, cout)
        dw = (dy2.T @ cols).reshape(cout, cin, k)
        db = dy2.sum(axis=0)
        dcols = dy2 @ w.reshape(cout, cin * k)
        dx = _col2im(dcols, x_shape, k)
        return dw, db, dx

    def forward_logits(self, x: np.ndarray, want_cache: bool = False):
        """x: (B, 3, N) -> logits (B,), optionally with backward cache."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 3 or x.shape[1] != IN_CHANNELS:
            raise ValueError(f"expected (batch, {IN_CHANNELS}, N) input, got {x.shape}")
        p = self.params
        cache: dict = {"x": x}

        c1, cols1 = self._conv_forward(x, p["block1_conv_w"], p["block1_conv_b"])
        proj = np.matmul(p["block1_proj_w"][:, :, 0], x) + p["block1_proj_b"][None, :, None]
        z1 = c1 + proj
        h1 = np.maximum(z1, 0.0)

        c2, cols2 = self._conv_forward(h1, p["block2_conv_w"], p["block2_conv_b"])
        z2 = c2 + h1
        h2 = np.maximum(z2, 0.0)

        c3, cols3 = self._conv_forward(h2, p["block3_conv_w"], p["block3_conv_b"])
        z3 = c3 + h2
        h3 = np.maximum(z3, 0.0)

        pooled = h3.mean(axis=2)
        logits = pooled @ p["head_w"] + p["head_b"][0]
        if not want_cache:
            return logits
        cache.update(
            cols1=cols1, cols2=cols2, cols3=cols3,
            z1=z1, z2=z2, z3=z3, h1=h1, h2=h2, pooled=pooled,
        )
        return logits, cache

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Sigmoid scores in (0, 1), one per window."""
        return _sigmoid(self.forward_logits(x))

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray):
        """Mean binary cross-entropy and its gradient for every parameter."""
        y = np.asarray(y, dtype=float)
        logits, cache = self.forward_logits(x, want_cache=True)
        bsz = len(y)
        loss = float(np.mean(_softplus(logits) - y * logits))
        dlogits = (_sigmoid(logits) - y) / bsz

        p = self.params
        grads: dict[str, np.ndarray] = {}
        grads["head_w"] = cache["pooled"].T @ dlogits
        grads["head_b"] = np.array([dlogits.sum()])
        n = x.shape[2]
        dh3 = (dlogits[:, None] * p["head_w"][None, :] / n)[:, :, None]  # broadcast over time

        dz3 = dh3 * (cache["z3"] > 0)
        dw3, db3, dh2_conv = self._conv_backward(dz3, cache["cols3"], p["block3_conv_w"], cache["h2"].shape)
        grads["block3_conv_w"], grads["block3_conv_b"] = dw3, db3
        dh2 = dh2_conv + dz3

        dz2 = dh2 * (cache["z2"] > 0)
        dw2, db2, dh1_conv = self._conv_backward(dz2, cache["cols2"], p["block2_conv_w"], cache["h1"].shape)
        grads["block2_conv_w"], grads["block2_conv_b"] = dw2, db2
        dh1 = dh1_conv + dz2

        dz1 = dh1 * (cache["z1"] > 0)
        dw1, db1, _ = self._conv_backward(dz1, cache["cols1"], p["block1_conv_w"], cache["x"].shape)
        grads["block1_conv_w"], grads["block1_conv_b"] = dw1, db1
        grads["block1_proj_w"] = np.einsum("bon,bcn->oc", dz1, cache["x"])[:, :, None]
        grads["block1_proj_b"] = dz1.sum(axis=(0, 2))
        return loss, grads

    # -- persistence ----------------------------------------------------

    def save(self, path) -> None:
        """Versioned JSON header line + little-endian float64 payload."""
        header = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "channels": self.channels,
            "in_channels": IN_CHANNELS,
            "kernel_sizes": list(KERNEL_SIZES),
            "seed": self.seed,
            "params": [[name, list(shape)] for name, shape in self.param_shapes()],
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            for _, arr in self.params.items():
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "ResidualConvNet":
        path = Path(path)
        with open(path, "rb") as fh:
            header_line = fh.readline()
            payload = fh.read()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise DataFormatError(f"{path}: not a model checkpoint (bad header)")
        if header.get("format") != CHECKPOINT_FORMAT or header.get("version") != CHECKPOINT_VERSION:
            raise DataFormatError(f"{path}: unsupported checkpoint format/version")
        net = cls(channels=int(header["channels"]), seed=header.get("seed"))
        expected = [[name, list(shape)] for name, shape in net.param_shapes()]
        if header.get("params") != expected or header.get("kernel_sizes") != list(KERNEL_SIZES):
            raise DataFormatError(f"{path}: checkpoint shape manifest does not match architecture")
        total = net.param_count() * 8
        if len(payload) != total:
            raise DataFormatError(f"{path}: payload is {len(payload)} bytes, expected {total}")
        offset = 0
        for name, arr in net.params.items():
            nbytes = arr.size * 8
            flat = np.frombuffer(payload[offset : offset + nbytes], dtype="<f8")
            net.params[name] = flat.reshape(arr.shape).astype(float)
            offset += nbytes
        return net


def init_model(seed: int, channels: int = 32) -> ResidualConvNet:
    """Fan-in scaled uniform weights, zero biases, deterministic in seed."""
    net = ResidualConvNet(channels=channels, seed=int(seed))
    rng = rng_for(seed, "init")
    for name, arr in net.params.items():
        if name.endswith("_b"):
            continue
        if arr.ndim == 3:
            fan_in = arr.shape[1] * arr.shape[2]
        else:
            fan_in = arr.shape[0]
        bound = 1.0 / np.sqrt(fan_in)
        net.params[name] = rng.uniform(-bound, bound, size=arr.shape)
    return net


def forward(net: ResidualConvNet, batch) -> np.ndarray:
    """Sigmoid scores for a batch of WindowTensors or a (B, 3, N) array."""
    return net.scores(stack_windows(batch))


def stack_windows(batch) -> np.ndarray:
    if isinstance(batch, np.ndarray):
        return batch
    return np.stack([t.values for t in batch])


class _Adam:
    """Adaptive moment estimation with the usual defaults."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * (g * g)
            mhat = self.m[name] / b1t
            vhat = self.v[name] / b2t
            params[name] = params[name] - self.lr * mhat / (np.sqrt(vhat) + self.eps)


@dataclass(frozen=True)
class TrainResult:
    nets: tuple[ResidualConvNet, ...]
    fold_aucs: tuple[float, ...]


def train(positives: Sequence[WindowTensor], negatives: Sequence[WindowTensor], cfg: TrainConfig) -> TrainResult:
    """Stratified k-fold training; returns one net per fold plus its
    validation AUC.  Deterministic given (data, cfg)."""
    n_pos, n_neg = len(positives), len(negatives)
    if n_pos < cfg.folds or n_neg < cfg.folds:
        raise ValueError(
            f"insufficient samples for stratified {cfg.folds}-fold split "
            f"({n_pos} positives, {n_neg} negatives)"
        )
    x = np.concatenate([stack_windows(positives), stack_windows(negatives)])
    y = np.concatenate([np.ones(n_pos), np.zeros(n_neg)])

    split_rng = rng_for(cfg.seed, "folds")
    pos_chunks = np.array_split(split_rng.permutation(n_pos), cfg.folds)
    neg_chunks = np.array_split(n_pos + split_rng.permutation(n_neg), cfg.folds)

    nets, fold_aucs = [], []
    for fold in range(cfg.folds):
        val_idx = np.concatenate([pos_chunks[fold], neg_chunks[fold]])
        train_idx = np.concatenate(
            [c for i, c in enumerate(pos_chunks) if i != fold]
            + [c for i, c in enumerate(neg_chunks) if i != fold]
        )
        net = _train_single(x, y, train_idx, cfg, stream=("fold", fold))
        val_scores = net.scores(x[val_idx])
        fold_aucs.append(roc_auc(val_scores, y[val_idx].astype(int)))
        nets.append(net)
    return TrainResult(nets=tuple(nets), fold_aucs=tuple(fold_aucs))


def _train_single(x, y, train_idx, cfg: TrainConfig, stream) -> ResidualConvNet:
    net = init_model(rng_for(cfg.seed, *stream, "init").integers(2 ** 62), cfg.channels)
    opt = _Adam(net.params, lr=cfg.learning_rate)
    epoch_rng = rng_for(cfg.seed, *stream, "epochs")
    for _epoch in range(cfg.epochs):
        order = train_idx[epoch_rng.permutation(len(train_idx))]
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            _, grads = net.loss_and_grads(x[batch], y[batch])
            opt.step(net.params, grads)
    return net


def predict(ensemble: Sequence[ResidualConvNet], windows) -> np.ndarray:
    """Mean of the fold models' sigmoid scores."""
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    x = stack_windows(windows)
    return np.mean([net.scores(x) for net in ensemble], axis=0)
