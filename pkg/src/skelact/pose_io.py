"""Data model and serialization for pose sequences, clips, and network input tensors.

A clip is a time-ordered list of frames; each frame holds zero or more
25-joint 2D poses (BODY_25 layout) plus an optional handled-object
annotation.  Clips are read from / written to a small JSON schema::

    {"clip_id": str, "fps": float,
     "frames": [{"index": int,
                 "people": [{"person_id": int|null, "keypoints": [75 floats]}],
                 "object": {"cx": float, "cy": float} | null}]}

``keypoints`` is the flat (x, y, confidence) triplet list in BODY_25
order.  A joint with confidence 0 counts as missing and its coordinates
are ignored by every geometric consumer in this package.

All sampling and tensor-building APIs address frames by *position* in
the clip's ordered frame list (0-based), not by the ``index`` metadata
field, which merely records the source frame number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EmptyClipError,
    IndexOutOfRange,
    MissingActorError,
    SchemaError,
    ZeroExtentError,
)

NUM_JOINTS = 25
OBJECT_NODE = 25
NUM_NODES_WITH_OBJECT = 26

# Canonical BODY_25 joint order.
JOINT_NAMES = (
    "Nose", "Neck", "RShoulder", "RElbow", "RWrist",
    "LShoulder", "LElbow", "LWrist", "MidHip", "RHip",
    "RKnee", "RAnkle", "LHip", "LKnee", "LAnkle",
    "REye", "LEye", "REar", "LEar", "LBigToe",
    "LSmallToe", "LHeel", "RBigToe", "RSmallToe", "RHeel",
)

NECK = 1
MID_HIP = 8
RIGHT_WRIST = 4
LEFT_WRIST = 7
WRIST_JOINTS = (RIGHT_WRIST, LEFT_WRIST)


@dataclass(frozen=True)
class Joint2D:
    """A single 2D keypoint with its estimation confidence."""

    x: float
    y: float
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence!r} outside [0, 1]")

    @property
    def missing(self) -> bool:
        return self.confidence == 0.0


@dataclass(frozen=True)
class Pose:
    """One person's 25-joint skeleton in a single frame."""

    joints: tuple[Joint2D, ...]
    person_id: int | None = None

    def __post_init__(self):
        if len(self.joints) != NUM_JOINTS:
            raise ValueError(f"pose needs exactly {NUM_JOINTS} joints, got {len(self.joints)}")
        if self.person_id is not None and self.person_id < 0:
            raise ValueError("person_id must be non-negative")


@dataclass(frozen=True)
class ObjectCandidate:
    """A detected handled-object blob.

    Only the center survives JSON round-trips; blob geometry and
    ownership are populated by the detector and consumed in-process.
    """

    cx: float
    cy: float
    bbox: tuple[int, int, int, int] | None = None  # (x, y, w, h)
    area: float | None = None
    owner: int | None = None
    owner_wrist: int | None = None


@dataclass(frozen=True)
class Frame:
    """All poses (and the optional object annotation) of one video frame."""

    index: int
    poses: tuple[Pose, ...] = ()
    object: ObjectCandidate | None = None


@dataclass(frozen=True)
class Clip:
    """A pose-annotated video clip."""

    clip_id: str
    fps: float
    frames: tuple[Frame, ...]
    label: int | None = None

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True, eq=False)
class PoseTensor:
    """The (3, T, N) channels x time x nodes array consumed by the network.

    Channel 0 is x, channel 1 is y, channel 2 the confidence score.
    N is 25 for human-only graphs and 26 when node 25 carries the object.
    """

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[0] != 3:
            raise ValueError(f"expected (3, T, N) array, got shape {d.shape}")
        if d.shape[2] not in (NUM_JOINTS, NUM_NODES_WITH_OBJECT):
            raise ValueError(f"node count must be 25 or 26, got {d.shape[2]}")

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    @property
    def num_nodes(self) -> int:
        return self.data.shape[2]


# --- geometry helpers --------------------------------------------------------

def pose_to_array(pose: Pose) -> np.ndarray:
    """Return the pose as a (25, 3) float array of (x, y, confidence)."""
    return np.array([(j.x, j.y, j.confidence) for j in pose.joints], dtype=np.float64)


def pose_from_array(arr: np.ndarray, person_id: int | None = None) -> Pose:
    """Build a Pose from a (25, 3) array of (x, y, confidence)."""
    joints = tuple(Joint2D(float(x), float(y), float(c)) for x, y, c in arr)
    return Pose(joints=joints, person_id=person_id)


def confidence_sum(pose: Pose) -> float:
    """Sum of all 25 joint confidences."""
    return float(sum(j.confidence for j in pose.joints))


def torso_length(pose: Pose, default: float = 60.0) -> float:
    """Neck-to-mid-hip distance, the scale unit for radii and gates.

    Falls back to half the confident-joint bounding-box diagonal, then
    to ``default``, when either torso endpoint is missing.
    """
    neck, hip = pose.joints[NECK], pose.joints[MID_HIP]
    if not neck.missing and not hip.missing:
        d = math.hypot(neck.x - hip.x, neck.y - hip.y)
        if d > 0:
            return d
    pts = [(j.x, j.y) for j in pose.joints if not j.missing]
    if len(pts) >= 2:
        xs, ys = zip(*pts)
        diag = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
        if diag > 0:
            return 0.5 * diag
    return default


# --- JSON serialization -------------------------------------------------------

def _require(mapping, key, kind, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = mapping[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{where}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _parse_person(entry, where: str) -> Pose:
    kpts = _require(entry, "keypoints", list, where)
    if len(kpts) != 3 * NUM_JOINTS:
        raise SchemaError(f"{where}: expected {3 * NUM_JOINTS} keypoint values, got {len(kpts)}")
    pid = entry.get("person_id")
    if pid is not None and (not isinstance(pid, int) or isinstance(pid, bool) or pid < 0):
        raise SchemaError(f"{where}: person_id must be a non-negative integer or null")
    try:
        joints = tuple(
            Joint2D(float(kpts[3 * i]), float(kpts[3 * i + 1]), float(kpts[3 * i + 2]))
            for i in range(NUM_JOINTS)
        )
        return Pose(joints=joints, person_id=pid)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def parse_pose_json(data: bytes | str) -> Clip:
    """Parse a pose JSON document into a Clip.

    Frames are returned sorted by their ``index`` field; duplicate
    indices, wrong joint counts, and out-of-range confidences are
    rejected with SchemaError.  An empty frame list raises
    EmptyClipError.
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    clip_id = _require(doc, "clip_id", str, "clip")
    fps = _require(doc, "fps", float, "clip")
    if fps <= 0:
        raise SchemaError("clip: fps must be positive")
    raw_frames = _require(doc, "frames", list, "clip")
    if not raw_frames:
        raise EmptyClipError(f"clip {clip_id!r} has no frames")

    frames = []
    for fi, rf in enumerate(raw_frames):
        where = f"frame[{fi}]"
        index = _require(rf, "index", int, where)
        if index < 0:
            raise SchemaError(f"{where}: index must be >= 0")
        people = _require(rf, "people", list, where)
        poses = tuple(_parse_person(p, f"{where}.people[{pi}]") for pi, p in enumerate(people))
        obj = rf.get("object")
        candidate = None
        if obj is not None:
            cx = _require(obj, "cx", float, f"{where}.object")
            cy = _require(obj, "cy", float, f"{where}.object")
            candidate = ObjectCandidate(cx=cx, cy=cy)
        frames.append(Frame(index=index, poses=poses, object=candidate))

    frames.sort(key=lambda f: f.index)
    indices = [f.index for f in frames]
    if len(set(indices)) != len(indices):
        raise SchemaError(f"clip {clip_id!r}: duplicate frame indices")
    return Clip(clip_id=clip_id, fps=fps, frames=tuple(frames))


def clip_to_dict(clip: Clip) -> dict:
    """Plain-dict form of a clip, matching the JSON schema."""
    frames = []
    for f in clip.frames:
        people = []
        for p in f.poses:
            flat: list[float] = []
            for j in p.joints:
                flat.extend((j.x, j.y, j.confidence))
            people.append({"person_id": p.person_id, "keypoints": flat})
        obj = None if f.object is None else {"cx": f.object.cx, "cy": f.object.cy}
        frames.append({"index": f.index, "people": people, "object": obj})
    return {"clip_id": clip.clip_id, "fps": clip.fps, "frames": frames}


def serialize_clip(clip: Clip) -> bytes:
    """Serialize a clip to canonical JSON bytes (round-trips exactly)."""
    return json.dumps(clip_to_dict(clip), separators=(",", ":")).encode("utf-8")


# --- tensor construction -------------------------------------------------------

def _actor_sequence(actor, num_frames: int) -> list[int]:
    if isinstance(actor, (int, np.integer)):
        return [int(actor)] * num_frames
    seq = [int(a) for a in actor]
    if len(seq) != num_frames:
        raise MissingActorError(
            f"actor map has {len(seq)} entries for {num_frames} frames")
    return seq


def to_pose_tensor(
    clip: Clip,
    actor: int | Sequence[int],
    sampled: Sequence[int],
    with_object: bool = False,
) -> PoseTensor:
    """Assemble the (3, T, N) input tensor for a clip.

    ``actor`` gives, per frame position, which pose in that frame is the
    tracked actor (-1 for absent); an int is broadcast to every frame.
    ``sampled`` lists the T frame positions to keep, in order.  With
    ``with_object`` the tensor gains node 25, carrying the frame's
    object center at confidence 1.0 when annotated and (0, 0, 0)
    otherwise.
    """
    actors = _actor_sequence(actor, len(clip.frames))
    n_nodes = NUM_NODES_WITH_OBJECT if with_object else NUM_JOINTS
    out = np.zeros((3, len(sampled), n_nodes), dtype=np.float64)
    for t, pos in enumerate(sampled):
        pos = int(pos)
        if not 0 <= pos < len(clip.frames):
            raise IndexOutOfRange(f"sampled frame position {pos} outside clip of {len(clip.frames)}")
        frame = clip.frames[pos]
        ai = actors[pos]
        if not 0 <= ai < len(frame.poses):
            raise MissingActorError(f"no actor pose at frame position {pos}")
        arr = pose_to_array(frame.poses[ai])
        out[0, t, :NUM_JOINTS] = arr[:, 0]
        out[1, t, :NUM_JOINTS] = arr[:, 1]
        out[2, t, :NUM_JOINTS] = arr[:, 2]
        if with_object and frame.object is not None:
            out[:, t, OBJECT_NODE] = (frame.object.cx, frame.object.cy, 1.0)
    return PoseTensor(data=out)


def normalize_coordinates(tensor: PoseTensor, width: float, height: float) -> PoseTensor:
    """Map the x/y channels to [-1, 1] via 2*v/extent - 1; confidences untouched."""
    if width <= 0 or height <= 0:
        raise ZeroExtentError(f"invalid extent {width}x{height}")
    data = tensor.data.copy()
    data[0] = 2.0 * data[0] / float(width) - 1.0
    data[1] = 2.0 * data[1] / float(height) - 1.0
    return PoseTensor(data=data)
