"""Skeletal graph construction and partitioned adjacency matrices.

The spatial graph joins the 25 BODY_25 joints along the natural body
connections, optionally augmented with a 26th object node wired to the
hands, the limbs, or the whole body.  Neighborhoods are partitioned
(uni-label, distance, or spatial-configuration) into per-subset
adjacency matrices, then symmetrically normalized for the graph
convolution; temporal connectivity is realized by the temporal
convolution stage, so adjacency stays N x N.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import DegeneratePoseError, StrategyError
from .pose_io import NUM_JOINTS, NUM_NODES_WITH_OBJECT, OBJECT_NODE

# Object-connection strategies.
HUMAN_ONLY = "human"
BODY = "body"
LIMBS = "limbs"
HANDS = "hands"
STRATEGIES = (HUMAN_ONLY, BODY, LIMBS, HANDS)

# Partitioning schemes.
UNI_LABEL = "uni"
DISTANCE = "distance"
SPATIAL_CONFIG = "spatial"
PARTITIONS = (UNI_LABEL, DISTANCE, SPATIAL_CONFIG)

DEFAULT_ALPHA = 0.001

# Canonical BODY_25 skeleton: 24 undirected bone pairs.
_HUMAN_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (6, 7), (1, 8),
    (8, 9), (9, 10), (10, 11), (8, 12), (12, 13), (13, 14), (0, 15),
    (15, 17), (0, 16), (16, 18), (14, 19), (19, 20), (14, 21), (11, 22),
    (22, 23), (11, 24),
)

# Arm and leg joints for the "limbs" object-connection strategy.
LIMB_JOINTS = (2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13, 14)

HAND_JOINTS = (4, 7)


def human_edges() -> frozenset[tuple[int, int]]:
    """The 24 natural bone connections over the 25 human joints."""
    return frozenset(_HUMAN_EDGES)


def object_edges(strategy: str) -> frozenset[tuple[int, int]]:
    """Edges wiring the object node (25) to human joints for a strategy."""
    if strategy == HANDS:
        joints: Iterable[int] = HAND_JOINTS
    elif strategy == LIMBS:
        joints = LIMB_JOINTS
    elif strategy == BODY:
        joints = range(NUM_JOINTS)
    else:
        raise StrategyError(f"strategy {strategy!r} adds no object edges")
    return frozenset((j, OBJECT_NODE) for j in joints)


@dataclass(frozen=True)
class GraphSpec:
    """Node count plus the undirected spatial edge set of a pose graph."""

    num_nodes: int
    edges: frozenset[tuple[int, int]]
    strategy: str = HUMAN_ONLY

    def __post_init__(self):
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{j}) not allowed")
            if not (0 <= i < self.num_nodes and 0 <= j < self.num_nodes):
                raise ValueError(f"edge ({i},{j}) outside {self.num_nodes} nodes")


def build_graph(strategy: str = HUMAN_ONLY) -> GraphSpec:
    """GraphSpec for an object-connection strategy (25 or 26 nodes)."""
    if strategy not in STRATEGIES:
        raise StrategyError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    edges = set(human_edges())
    if strategy == HUMAN_ONLY:
        return GraphSpec(num_nodes=NUM_JOINTS, edges=frozenset(edges), strategy=strategy)
    edges |= object_edges(strategy)
    return GraphSpec(num_nodes=NUM_NODES_WITH_OBJECT, edges=frozenset(edges),
                     strategy=strategy)


def adjacency_matrix(spec: GraphSpec) -> np.ndarray:
    """Binary symmetric adjacency of the spatial edges (no self-loops)."""
    a = np.zeros((spec.num_nodes, spec.num_nodes), dtype=np.float64)
    for i, j in spec.edges:
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a


@dataclass(frozen=True)
class GravityCenter:
    """Mean coordinate of the confident human joints."""

    gx: float
    gy: float


@dataclass(frozen=True, eq=False)
class PartitionedAdjacency:
    """Per-subset adjacency matrices for the partitioned graph convolution.

    ``matrices`` holds 1 matrix for uni-label, 2 for distance
    (root, 1-neighbors) and 3 for spatial configuration (root,
    centripetal, centrifugal).  ``normalized`` records whether the
    symmetric degree normalization has been applied.
    """

    matrices: tuple[np.ndarray, ...]
    scheme: str
    normalized: bool = False
    alpha: float | None = None

    @property
    def num_subsets(self) -> int:
        return len(self.matrices)

    @property
    def num_nodes(self) -> int:
        return self.matrices[0].shape[0]

    def stacked(self) -> np.ndarray:
        """The matrices as one (num_subsets, N, N) array."""
        return np.stack(self.matrices, axis=0)


def partition_uni_label(spec: GraphSpec) -> PartitionedAdjacency:
    """Single-subset partition: neighbors plus root, A + I."""
    a = adjacency_matrix(spec) + np.eye(spec.num_nodes)
    return PartitionedAdjacency(matrices=(a,), scheme=UNI_LABEL)


def partition_distance(spec: GraphSpec) -> PartitionedAdjacency:
    """Two subsets: the root itself (I) and its 1-distance neighbors (A)."""
    return PartitionedAdjacency(
        matrices=(np.eye(spec.num_nodes), adjacency_matrix(spec)),
        scheme=DISTANCE)


def mean_pose_from_tensor(data: np.ndarray) -> np.ndarray:
    """Per-node mean (x, y) over the frames where the node is confident.

    ``data`` is a (3, T, N) tensor; nodes never observed get NaN
    coordinates.
    """
    conf = data[2] > 0.0  # (T, N)
    counts = conf.sum(axis=0)
    with np.errstate(invalid="ignore"):
        mx = np.where(counts > 0, (data[0] * conf).sum(axis=0) / np.maximum(counts, 1), np.nan)
        my = np.where(counts > 0, (data[1] * conf).sum(axis=0) / np.maximum(counts, 1), np.nan)
    return np.stack([mx, my], axis=1)


def gravity_center(mean_pose: np.ndarray) -> GravityCenter:
    """Mean coordinate of the observed human joints (first 25 nodes)."""
    human = mean_pose[:NUM_JOINTS]
    valid = ~np.isnan(human[:, 0])
    if not valid.any():
        raise DegeneratePoseError("all joints missing; gravity center undefined")
    gx, gy = human[valid].mean(axis=0)
    return GravityCenter(gx=float(gx), gy=float(gy))


def partition_spatial_config(spec: GraphSpec, mean_pose: np.ndarray) -> PartitionedAdjacency:
    """Root / centripetal / centrifugal partition around the gravity center.

    For each directed neighbor pair i -> j, the neighbor j is
    centripetal when it sits no farther from the gravity center than
    the root i (ties count as centripetal), centrifugal otherwise.
    Nodes with no confident observation are placed at the gravity
    center.
    """
    n = spec.num_nodes
    if mean_pose.shape != (n, 2):
        raise ValueError(f"mean_pose must be ({n}, 2), got {mean_pose.shape}")
    g = gravity_center(mean_pose)
    coords = np.array(mean_pose, dtype=np.float64, copy=True)
    missing = np.isnan(coords[:, 0]) | np.isnan(coords[:, 1])
    coords[missing] = (g.gx, g.gy)
    dist = np.hypot(coords[:, 0] - g.gx, coords[:, 1] - g.gy)

    a1 = np.zeros((n, n), dtype=np.float64)
    a2 = np.zeros((n, n), dtype=np.float64)
    for i, j in spec.edges:
        for root, nb in ((i, j), (j, i)):
            if dist[nb] <= dist[root]:
                a1[root, nb] = 1.0
            else:
                a2[root, nb] = 1.0
    return PartitionedAdjacency(matrices=(np.eye(n), a1, a2), scheme=SPATIAL_CONFIG)


def normalize(adj: PartitionedAdjacency, alpha: float = DEFAULT_ALPHA) -> PartitionedAdjacency:
    """Symmetric degree normalization of every subset matrix.

    Each A_j becomes L^-1/2 A_j L^-1/2 with L_ii = row_sum_i + alpha.
    With alpha = 0, rows that were all-zero stay all-zero instead of
    producing NaN.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    mats = []
    for a in adj.matrices:
        deg = a.sum(axis=1) + alpha
        with np.errstate(divide="ignore"):
            inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-300)), 0.0)
        mats.append(inv_sqrt[:, None] * a * inv_sqrt[None, :])
    return replace(adj, matrices=tuple(mats), normalized=True, alpha=alpha)


def build_partition(
    spec: GraphSpec,
    scheme: str,
    mean_pose: np.ndarray | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> PartitionedAdjacency:
    """Partition + normalize in one step (spatial needs a mean pose)."""
    if scheme == UNI_LABEL:
        part = partition_uni_label(spec)
    elif scheme == DISTANCE:
        part = partition_distance(spec)
    elif scheme == SPATIAL_CONFIG:
        if mean_pose is None:
            raise ValueError("spatial partitioning needs a mean pose")
        part = partition_spatial_config(spec, mean_pose)
    else:
        raise StrategyError(f"unknown partition scheme {scheme!r}; expected one of {PARTITIONS}")
    return normalize(part, alpha=alpha)


def dump_adjacency(adj: PartitionedAdjacency) -> str:
    """Plain-text dump (row-major, 9 significant digits) for cross-checking."""
    lines = [f"subsets {adj.num_subsets} nodes {adj.num_nodes} scheme {adj.scheme}"]
    for k, a in enumerate(adj.matrices):
        lines.append(f"matrix {k}")
        for row in a:
            lines.append(" ".join(f"{v:.9g}" for v in row))
    return "\n".join(lines) + "\n"
