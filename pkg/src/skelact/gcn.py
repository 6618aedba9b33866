"""Graph-convolution engine: forward, analytic backward, optimizer, estimator.

Everything is plain float64 numpy.  Feature maps follow the (C, T, N)
axis convention (channels, time, nodes); batches prepend a leading axis.
A network layer is a partitioned spatial graph convolution (one weight
matrix per neighbor subset, summed after multiplying by the normalized
per-subset adjacency), ReLU, a per-node temporal convolution with odd
kernel and zero padding, bias, ReLU.  The stack ends in global average
pooling over time and nodes, a linear head, and softmax.

Gradients are implemented analytically and validated against central
finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import graph as graphmod
from .errors import ShapeMismatch
from .graph import GraphSpec, PartitionedAdjacency

STANDARD_CHANNELS = (64, 64, 64, 128, 128, 128, 256, 256, 256)
STANDARD_STRIDES = (1, 1, 1, 2, 1, 1, 2, 1, 1)
DEFAULT_TEMPORAL_KERNEL = 9
INPUT_CHANNELS = 3


def check_tensor3(arr: np.ndarray, name: str = "tensor") -> np.ndarray:
    """Validate a (C, T, N) feature map: 3 axes, positive dims, finite."""
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim != 3 or min(a.shape) < 1:
        raise ShapeMismatch(f"{name} must be a (C, T, N) array, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ShapeMismatch(f"{name} contains non-finite entries")
    return a


# --- parameter containers ------------------------------------------------------

@dataclass
class GcnLayer:
    """Weights of one spatial-graph + temporal convolution unit."""

    w_spatial: np.ndarray   # (num_subsets, c_in, c_out)
    w_temporal: np.ndarray  # (c_out, c_out, kernel)
    bias: np.ndarray        # (c_out,)
    stride: int = 1

    def __post_init__(self):
        if self.w_temporal.shape[2] % 2 != 1:
            raise ValueError("temporal kernel size must be odd")
        if self.stride not in (1, 2):
            raise ValueError("temporal stride must be 1 or 2")

    @property
    def c_in(self) -> int:
        return self.w_spatial.shape[1]

    @property
    def c_out(self) -> int:
        return self.w_spatial.shape[2]

    @property
    def num_subsets(self) -> int:
        return self.w_spatial.shape[0]


@dataclass
class GcnModel:
    """A stack of GCN layers plus the linear classifier head.

    ``adjacency`` holds the normalized topology matrices shared by all
    inputs for uni-label / distance partitioning; for spatial
    configuration it stays None and callers supply per-sample matrices.
    """

    layers: list[GcnLayer]
    head_w: np.ndarray  # (c_last, num_classes)
    head_b: np.ndarray  # (num_classes,)
    strategy: str
    partition: str
    alpha: float = graphmod.DEFAULT_ALPHA
    adjacency: PartitionedAdjacency | None = None
    seed: int = 0
    epoch: int = 0

    @property
    def num_classes(self) -> int:
        return self.head_w.shape[1]

    @property
    def num_subsets(self) -> int:
        return self.layers[0].num_subsets

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """Named parameter arrays, in a stable order."""
        out = []
        for i, layer in enumerate(self.layers):
            out.append((f"layers.{i}.w_spatial", layer.w_spatial))
            out.append((f"layers.{i}.w_temporal", layer.w_temporal))
            out.append((f"layers.{i}.bias", layer.bias))
        out.append(("head.w", self.head_w))
        out.append(("head.b", self.head_b))
        return out


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def num_subsets_for(partition: str) -> int:
    return {graphmod.UNI_LABEL: 1, graphmod.DISTANCE: 2, graphmod.SPATIAL_CONFIG: 3}[partition]


def init_model(
    num_classes: int,
    strategy: str = graphmod.HUMAN_ONLY,
    partition: str = graphmod.SPATIAL_CONFIG,
    channels: Sequence[int] = STANDARD_CHANNELS,
    strides: Sequence[int] | None = None,
    in_channels: int = INPUT_CHANNELS,
    temporal_kernel: int = DEFAULT_TEMPORAL_KERNEL,
    alpha: float = graphmod.DEFAULT_ALPHA,
    seed: int = 0,
) -> GcnModel:
    """Build a freshly initialized model (Glorot-uniform weights, zero biases).

    Defaults give the production 9-layer ladder with temporal stride 2
    where the channel count doubles.
    """
    channels = tuple(channels)
    if strides is None:
        strides = tuple(2 if i > 0 and channels[i] != channels[i - 1] else 1
                        for i in range(len(channels)))
    strides = tuple(strides)
    if len(strides) != len(channels):
        raise ValueError("strides and channels must have equal length")
    subsets = num_subsets_for(partition)
    rng = np.random.default_rng(seed)
    layers = []
    c_prev = in_channels
    for c_out, stride in zip(channels, strides):
        w_s = _glorot(rng, (subsets, c_prev, c_out), c_prev, c_out)
        w_t = _glorot(rng, (c_out, c_out, temporal_kernel),
                      c_out * temporal_kernel, c_out * temporal_kernel)
        layers.append(GcnLayer(w_spatial=w_s, w_temporal=w_t,
                               bias=np.zeros(c_out), stride=stride))
        c_prev = c_out
    head_w = _glorot(rng, (c_prev, num_classes), c_prev, num_classes)
    head_b = np.zeros(num_classes)

    spec = graphmod.build_graph(strategy)
    adjacency = None
    if partition != graphmod.SPATIAL_CONFIG:
        adjacency = graphmod.build_partition(spec, partition, alpha=alpha)
    return GcnModel(layers=layers, head_w=head_w, head_b=head_b,
                    strategy=strategy, partition=partition, alpha=alpha,
                    adjacency=adjacency, seed=seed)


# --- elementary ops -------------------------------------------------------------

def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """Average over the time and node axes; keeps (..., C)."""
    if x.ndim == 3:
        return x.mean(axis=(1, 2))
    if x.ndim == 4:
        return x.mean(axis=(2, 3))
    raise ShapeMismatch(f"expected (C,T,N) or (B,C,T,N), got shape {x.shape}")


def linear_head(v: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map of pooled features to class logits."""
    if v.shape[-1] != w.shape[0]:
        raise ShapeMismatch(f"feature dim {v.shape[-1]} != head input {w.shape[0]}")
    return v @ w + b


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, numerically stabilized."""
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probabilities: np.ndarray, labels: np.ndarray | int) -> float:
    """Mean categorical cross-entropy of probability rows against int labels."""
    p = np.atleast_2d(probabilities)
    y = np.atleast_1d(labels)
    if p.shape[0] != y.shape[0]:
        raise ShapeMismatch("one label per probability row required")
    picked = p[np.arange(p.shape[0]), y]
    return float(-np.mean(np.log(picked)))


# --- spatial graph convolution ---------------------------------------------------

def _as_batch_mats(adj: PartitionedAdjacency | np.ndarray) -> np.ndarray:
    """Adjacency as an array: (J, N, N) shared or (J, B, N, N) per sample."""
    if isinstance(adj, PartitionedAdjacency):
        return adj.stacked()
    return np.asarray(adj, dtype=np.float64)


def _spatial_forward(x: np.ndarray, mats: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x (B,Ci,T,N), mats (J,N,N)|(J,B,N,N), w (J,Ci,Co) -> (B,Co,T,N)."""
    b, ci, t, n = x.shape
    xf = x.reshape(b, ci * t, n)
    out = None
    for j in range(w.shape[0]):
        a = mats[j]
        if a.ndim == 2:
            xa = xf @ a.T
        else:
            xa = np.matmul(xf, np.swapaxes(a, 1, 2))
        xa = xa.reshape(b, ci, t, n)
        y = np.tensordot(xa, w[j], axes=([1], [0]))  # (B,T,N,Co)
        y = np.moveaxis(y, 3, 1)
        out = y if out is None else out + y
    return np.ascontiguousarray(out)


def _spatial_backward(g: np.ndarray, x: np.ndarray, mats: np.ndarray,
                      w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the spatial conv: returns (dx, dw)."""
    b, ci, t, n = x.shape
    xf = x.reshape(b, ci * t, n)
    dx = np.zeros_like(x)
    dw = np.zeros_like(w)
    dxf = dx.reshape(b, ci * t, n)
    for j in range(w.shape[0]):
        a = mats[j]
        if a.ndim == 2:
            xa = (xf @ a.T).reshape(b, ci, t, n)
        else:
            xa = np.matmul(xf, np.swapaxes(a, 1, 2)).reshape(b, ci, t, n)
        dw[j] = np.tensordot(xa, g, axes=([0, 2, 3], [0, 2, 3]))
        dxa = np.tensordot(w[j], g, axes=([1], [1]))  # (Ci,B,T,N)
        dxa = np.moveaxis(dxa, 0, 1).reshape(b, ci * t, n)
        if a.ndim == 2:
            dxf += dxa @ a
        else:
            dxf += np.matmul(dxa, a)
    return dx, dw


def spatial_gconv_forward(f_in: np.ndarray, adj: PartitionedAdjacency | np.ndarray,
                          layer: GcnLayer) -> np.ndarray:
    """Partitioned spatial graph convolution of one (C, T, N) feature map.

    Computes sum_j A_j_normalized . X . W_j per time slice, yielding
    (c_out, T, N).
    """
    x = check_tensor3(f_in, "f_in")
    mats = _as_batch_mats(adj)
    if mats.shape[0] != layer.num_subsets:
        raise ShapeMismatch(
            f"adjacency has {mats.shape[0]} subsets, layer expects {layer.num_subsets}")
    if x.shape[0] != layer.c_in:
        raise ShapeMismatch(f"input channels {x.shape[0]} != layer c_in {layer.c_in}")
    if x.shape[2] != mats.shape[-1]:
        raise ShapeMismatch(f"node count {x.shape[2]} != adjacency {mats.shape[-1]}")
    return _spatial_forward(x[None], mats, layer.w_spatial)[0]


def nodewise_gconv_reference(
    f_in: np.ndarray,
    spec: GraphSpec,
    labels: dict[tuple[int, int], int],
    weights: np.ndarray,
) -> np.ndarray:
    """Literal neighbor-sum graph convolution, used as a test oracle.

    For each node the neighbor set (self plus 1-distance neighbors) is
    walked explicitly; each neighbor's features are weighted by the
    subset matrix chosen by ``labels[(root, neighbor)]`` and divided by
    the cardinality of that subset within the neighborhood.
    """
    x = check_tensor3(f_in, "f_in")
    c_in, t, n = x.shape
    if n != spec.num_nodes:
        raise ShapeMismatch(f"feature nodes {n} != graph nodes {spec.num_nodes}")
    if weights.shape[1] != c_in:
        raise ShapeMismatch("weight c_in mismatch")
    neighbors: list[list[int]] = [[i] for i in range(n)]
    for i, j in spec.edges:
        neighbors[i].append(j)
        neighbors[j].append(i)
    out = np.zeros((weights.shape[2], t, n))
    for i in range(n):
        counts: dict[int, int] = {}
        for nb in neighbors[i]:
            lab = labels[(i, nb)]
            counts[lab] = counts.get(lab, 0) + 1
        for nb in neighbors[i]:
            lab = labels[(i, nb)]
            out[:, :, i] += (weights[lab].T @ x[:, :, nb]) / counts[lab]
    return out


def partition_labels(
    spec: GraphSpec, scheme: str, mean_pose: np.ndarray | None = None,
) -> dict[tuple[int, int], int]:
    """Neighbor subset labels matching a partitioning scheme.

    Keys are directed (root, neighbor) pairs including (i, i).
    """
    labels: dict[tuple[int, int], int] = {}
    if scheme == graphmod.UNI_LABEL:
        for i in range(spec.num_nodes):
            labels[(i, i)] = 0
        for i, j in spec.edges:
            labels[(i, j)] = 0
            labels[(j, i)] = 0
        return labels
    if scheme == graphmod.DISTANCE:
        for i in range(spec.num_nodes):
            labels[(i, i)] = 0
        for i, j in spec.edges:
            labels[(i, j)] = 1
            labels[(j, i)] = 1
        return labels
    if scheme == graphmod.SPATIAL_CONFIG:
        if mean_pose is None:
            raise ValueError("spatial labels need a mean pose")
        part = graphmod.partition_spatial_config(spec, mean_pose)
        _, a1, _ = part.matrices
        for i in range(spec.num_nodes):
            labels[(i, i)] = 0
        for i, j in spec.edges:
            for root, nb in ((i, j), (j, i)):
                labels[(root, nb)] = 1 if a1[root, nb] else 2
        return labels
    raise ValueError(f"unknown scheme {scheme!r}")


# --- temporal convolution ---------------------------------------------------------

def _temporal_forward(h: np.ndarray, w: np.ndarray, bias: np.ndarray,
                      stride: int) -> np.ndarray:
    """h (B,C,T,N), w (Co,Ci,K) -> (B,Co,ceil(T/stride),N)."""
    b, ci, t, n = h.shape
    co, ci_w, k = w.shape
    if ci_w != ci:
        raise ShapeMismatch(f"temporal kernel expects {ci_w} channels, got {ci}")
    pad = (k - 1) // 2
    hp = np.pad(h, ((0, 0), (0, 0), (pad, pad), (0, 0)))
    win = sliding_window_view(hp, k, axis=2)[:, :, ::stride]  # (B,Ci,T',N,K)
    tp = win.shape[2]
    win2 = win.transpose(0, 2, 3, 1, 4).reshape(b * tp * n, ci * k)
    out2 = win2 @ w.reshape(co, ci * k).T
    out = out2.reshape(b, tp, n, co).transpose(0, 3, 1, 2)
    return np.ascontiguousarray(out) + bias[None, :, None, None]


def _temporal_backward(g: np.ndarray, h: np.ndarray, w: np.ndarray,
                       stride: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of the temporal conv: returns (dh, dw, dbias)."""
    b, ci, t, n = h.shape
    co, _, k = w.shape
    pad = (k - 1) // 2
    hp = np.pad(h, ((0, 0), (0, 0), (pad, pad), (0, 0)))
    win = sliding_window_view(hp, k, axis=2)[:, :, ::stride]
    tp = win.shape[2]
    win2 = win.transpose(0, 2, 3, 1, 4).reshape(b * tp * n, ci * k)
    g2 = g.transpose(0, 2, 3, 1).reshape(b * tp * n, co)
    dw = (g2.T @ win2).reshape(co, ci, k)
    dwin = (g2 @ w.reshape(co, ci * k)).reshape(b, tp, n, ci, k)
    dwin = dwin.transpose(0, 3, 1, 2, 4)  # (B,Ci,T',N,K)
    dhp = np.zeros((b, ci, t + 2 * pad, n))
    for kk in range(k):
        dhp[:, :, kk:kk + stride * tp:stride, :] += dwin[:, :, :, :, kk]
    dbias = g.sum(axis=(0, 2, 3))
    return dhp[:, :, pad:pad + t, :], dw, dbias


def temporal_conv_forward(f: np.ndarray, layer: GcnLayer) -> np.ndarray:
    """Per-node 1-D temporal convolution of a (C, T, N) map, with bias."""
    x = check_tensor3(f, "f")
    return _temporal_forward(x[None], layer.w_temporal, layer.bias, layer.stride)[0]


# --- full network ------------------------------------------------------------------

def forward(model: GcnModel, x: np.ndarray,
            mats: np.ndarray | PartitionedAdjacency | None = None,
            want_cache: bool = False):
    """Run the network on a batch x (B, 3, T, N).

    Returns (logits, cache); cache is None unless requested.  ``mats``
    defaults to the model's stored topology adjacency.
    """
    if mats is None:
        if model.adjacency is None:
            raise ShapeMismatch("model has no stored adjacency; pass mats explicitly")
        mats = model.adjacency
    m = _as_batch_mats(mats)
    if x.ndim != 4:
        raise ShapeMismatch(f"expected batch (B,3,T,N), got shape {x.shape}")
    if x.shape[3] != m.shape[-1]:
        raise ShapeMismatch(f"input nodes {x.shape[3]} != adjacency nodes {m.shape[-1]}")
    cache = {"inputs": [], "h": [], "y": []} if want_cache else None
    cur = np.asarray(x, dtype=np.float64)
    for layer in model.layers:
        s = _spatial_forward(cur, m, layer.w_spatial)
        h = relu(s)
        z = _temporal_forward(h, layer.w_temporal, layer.bias, layer.stride)
        y = relu(z)
        if want_cache:
            cache["inputs"].append(cur)
            cache["h"].append(h)
            cache["y"].append(y)
        cur = y
    v = global_avg_pool(cur)
    logits = linear_head(v, model.head_w, model.head_b)
    if want_cache:
        cache["pooled"] = v
        cache["mats"] = m
    return logits, cache


def predict_proba(model: GcnModel, x: np.ndarray,
                  mats: np.ndarray | PartitionedAdjacency | None = None) -> np.ndarray:
    logits, _ = forward(model, x, mats)
    return softmax(logits)


def backward(model: GcnModel, cache: dict, logits: np.ndarray,
             labels: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic gradients of the mean cross-entropy over the batch.

    Needs the cache produced by ``forward(..., want_cache=True)``.
    Returns a dict mapping parameter names to gradient arrays.
    """
    b = logits.shape[0]
    probs = softmax(logits)
    dlogits = probs.copy()
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b

    grads: dict[str, np.ndarray] = {}
    v = cache["pooled"]
    grads["head.w"] = v.T @ dlogits
    grads["head.b"] = dlogits.sum(axis=0)
    dv = dlogits @ model.head_w.T

    y_last = cache["y"][-1]
    _, c, tp, n = y_last.shape
    g = np.broadcast_to(dv[:, :, None, None], y_last.shape) / (tp * n)
    m = cache["mats"]
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        g = np.where(cache["y"][i] > 0, g, 0.0)
        dh, dw_t, dbias = _temporal_backward(g, cache["h"][i], layer.w_temporal,
                                             layer.stride)
        dh = np.where(cache["h"][i] > 0, dh, 0.0)
        dx, dw_s = _spatial_backward(dh, cache["inputs"][i], m, layer.w_spatial)
        grads[f"layers.{i}.w_spatial"] = dw_s
        grads[f"layers.{i}.w_temporal"] = dw_t
        grads[f"layers.{i}.bias"] = dbias
        g = dx
    return grads


def loss_and_grads(model: GcnModel, x: np.ndarray, labels: np.ndarray,
                   mats=None) -> tuple[float, np.ndarray, dict[str, np.ndarray]]:
    """One forward/backward pass; returns (loss, probabilities, grads)."""
    logits, cache = forward(model, x, mats, want_cache=True)
    probs = softmax(logits)
    loss = cross_entropy(probs, labels)
    grads = backward(model, cache, logits, labels)
    return loss, probs, grads


# --- optimizer ------------------------------------------------------------------

def sgd_update(param: np.ndarray, grad: np.ndarray, velocity: np.ndarray,
               lr: float, momentum: float) -> None:
    """In-place momentum SGD on one array: v = m*v + g; p -= lr*v."""
    velocity *= momentum
    velocity += grad
    param -= lr * velocity


class SgdOptimizer:
    """Momentum SGD over a model's named parameters (deterministic)."""

    def __init__(self, model: GcnModel, lr: float = 0.01, momentum: float = 0.9):
        if lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        self.lr = lr
        self.momentum = momentum
        self.velocity = {name: np.zeros_like(p) for name, p in model.parameters()}

    def step(self, model: GcnModel, grads: dict[str, np.ndarray],
             lr: float | None = None) -> None:
        use_lr = self.lr if lr is None else lr
        for name, p in model.parameters():
            sgd_update(p, grads[name], self.velocity[name], use_lr, self.momentum)


def sgd_step(model: GcnModel, grads: dict[str, np.ndarray], lr: float,
             momentum: float, velocity: dict[str, np.ndarray] | None = None,
             ) -> dict[str, np.ndarray]:
    """Single in-place momentum-SGD step; returns the velocity state."""
    if velocity is None:
        velocity = {name: np.zeros_like(p) for name, p in model.parameters()}
    for name, p in model.parameters():
        sgd_update(p, grads[name], velocity[name], lr, momentum)
    return velocity


# --- sklearn-style estimator -------------------------------------------------------

class GraphConvClassifier(BaseEstimator, ClassifierMixin):
    """Action classifier over pose tensors, with the sklearn estimator API.

    Parameters
    ----------
    strategy : object-connection strategy ('human', 'body', 'limbs', 'hands');
        fixes the expected node count (25 for 'human', else 26).
    partition : neighbor partitioning ('uni', 'distance', 'spatial').  With
        'spatial', each sample's adjacency is derived from its own mean
        pose and gravity center.
    channels, strides : per-layer output channels and temporal strides;
        defaults are the production 9-layer ladder.
    temporal_kernel : odd temporal kernel size.
    lr, momentum, lr_decay, lr_decay_epoch : momentum-SGD schedule (the
        learning rate is multiplied by ``lr_decay`` once, at
        ``lr_decay_epoch``).
    epochs, batch_size, seed : training loop controls.
    target_accuracy : optional early-stop threshold checked against the
        eval set passed to ``fit``.
    """

    def __init__(self, strategy: str = graphmod.HUMAN_ONLY,
                 partition: str = graphmod.SPATIAL_CONFIG,
                 alpha: float = graphmod.DEFAULT_ALPHA,
                 channels: Sequence[int] = STANDARD_CHANNELS,
                 strides: Sequence[int] | None = None,
                 temporal_kernel: int = DEFAULT_TEMPORAL_KERNEL,
                 lr: float = 0.01, momentum: float = 0.9,
                 lr_decay: float = 0.1, lr_decay_epoch: int = 30,
                 epochs: int = 10, batch_size: int = 32, seed: int = 0,
                 target_accuracy: float | None = None):
        self.strategy = strategy
        self.partition = partition
        self.alpha = alpha
        self.channels = channels
        self.strides = strides
        self.temporal_kernel = temporal_kernel
        self.lr = lr
        self.momentum = momentum
        self.lr_decay = lr_decay
        self.lr_decay_epoch = lr_decay_epoch
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.target_accuracy = target_accuracy

    # -- internals --

    def _validate_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 4 or x.shape[1] != INPUT_CHANNELS:
            raise ShapeMismatch(f"X must be (n_samples, 3, T, N), got shape {x.shape}")
        spec = graphmod.build_graph(self.strategy)
        if x.shape[3] != spec.num_nodes:
            raise ShapeMismatch(
                f"strategy {self.strategy!r} expects {spec.num_nodes} nodes, X has {x.shape[3]}")
        if not np.isfinite(x).all():
            raise ShapeMismatch("X contains non-finite entries")
        return x

    def _adjacency_for(self, x: np.ndarray) -> np.ndarray:
        """(J, N, N) shared matrices, or (J, B, N, N) for spatial partitioning."""
        spec = graphmod.build_graph(self.strategy)
        if self.partition != graphmod.SPATIAL_CONFIG:
            return graphmod.build_partition(spec, self.partition, alpha=self.alpha).stacked()
        mats = np.empty((3, x.shape[0], spec.num_nodes, spec.num_nodes))
        for b in range(x.shape[0]):
            mean_pose = graphmod.mean_pose_from_tensor(x[b])
            adj = graphmod.build_partition(spec, self.partition, mean_pose=mean_pose,
                                           alpha=self.alpha)
            mats[:, b] = adj.stacked()
        return mats

    def _eval_on(self, x: np.ndarray, y_idx: np.ndarray) -> tuple[float, float]:
        probs = self._predict_proba_array(x)
        loss = cross_entropy(probs, y_idx)
        top1 = float(np.mean(probs.argmax(axis=1) == y_idx))
        return loss, top1

    def _predict_proba_array(self, x: np.ndarray) -> np.ndarray:
        mats = self._adjacency_for(x)
        out = np.empty((x.shape[0], self.model_.num_classes))
        step = max(1, int(self.batch_size))
        for lo in range(0, x.shape[0], step):
            hi = min(lo + step, x.shape[0])
            m = mats if mats.ndim == 3 else mats[:, lo:hi]
            logits, _ = forward(self.model_, x[lo:hi], m)
            out[lo:hi] = softmax(logits)
        return out

    # -- estimator API --

    def fit(self, X, y, eval_set: tuple | None = None):
        """Train with momentum SGD; records per-epoch history.

        ``eval_set`` is an optional (X_eval, y_eval) pair evaluated each
        epoch (and used for ``target_accuracy`` early stopping).
        """
        x = self._validate_x(X)
        y = np.asarray(y)
        if y.shape[0] != x.shape[0]:
            raise ShapeMismatch("X and y disagree on sample count")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        mats = self._adjacency_for(x)

        model = init_model(
            num_classes=len(self.classes_), strategy=self.strategy,
            partition=self.partition, channels=self.channels, strides=self.strides,
            temporal_kernel=self.temporal_kernel, alpha=self.alpha, seed=self.seed)
        self.model_ = model
        opt = SgdOptimizer(model, lr=self.lr, momentum=self.momentum)
        self.optimizer_ = opt
        rng = np.random.default_rng(self.seed)
        n = x.shape[0]
        step = max(1, int(self.batch_size))
        self.history_ = []

        eval_pack = None
        if eval_set is not None:
            xe = self._validate_x(eval_set[0])
            ye = np.searchsorted(self.classes_, np.asarray(eval_set[1]))
            eval_pack = (xe, ye)

        for epoch in range(self.epochs):
            lr = self.lr * (self.lr_decay if epoch >= self.lr_decay_epoch else 1.0)
            order = rng.permutation(n)
            losses = []
            correct = 0
            for lo in range(0, n, step):
                idx = order[lo:lo + step]
                m = mats if mats.ndim == 3 else mats[:, idx]
                loss, probs, grads = loss_and_grads(model, x[idx], y_idx[idx], m)
                opt.step(model, grads, lr=lr)
                losses.append(loss * len(idx))
                correct += int(np.sum(probs.argmax(axis=1) == y_idx[idx]))
            model.epoch = epoch + 1
            self.history_.append({
                "epoch": epoch + 1, "split": "train",
                "loss": float(np.sum(losses) / n), "top1": correct / n,
            })
            if eval_pack is not None:
                ev_loss, ev_top1 = self._eval_on(*eval_pack)
                self.history_.append({"epoch": epoch + 1, "split": "eval",
                                      "loss": ev_loss, "top1": ev_top1})
                if self.target_accuracy is not None and ev_top1 >= self.target_accuracy:
                    break
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self._predict_proba_array(self._validate_x(X))

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return self.classes_[probs.argmax(axis=1)]
