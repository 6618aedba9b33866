"""Frame sampling: segment planning, reliable-frame selection, actor choice.

A clip is split into T equal-interval segments; from each segment we
keep either its first frame (uniform sampling) or the frame whose actor
pose has the highest joint-confidence sum (informative sampling), which
discards frames where pose estimation degraded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NoPersonError, TooFewFramesError
from .pose_io import Clip, Frame, confidence_sum


@dataclass(frozen=True)
class SegmentPlan:
    """T disjoint, ordered, half-open frame-position ranges covering a clip."""

    boundaries: tuple[tuple[int, int], ...]

    @property
    def num_segments(self) -> int:
        return len(self.boundaries)


@dataclass(frozen=True)
class FrameScore:
    """A frame position with its actor's joint-confidence sum."""

    frame_index: int
    score: float


def plan_segments(num_frames: int, num_segments: int) -> SegmentPlan:
    """Split [0, num_frames) into ``num_segments`` equal-interval ranges.

    Segment lengths differ by at most one, with the longer segments
    first.  Raises TooFewFramesError when there are more segments than
    frames.
    """
    if num_segments < 1:
        raise TooFewFramesError(f"segment count must be >= 1, got {num_segments}")
    if num_segments > num_frames:
        raise TooFewFramesError(
            f"cannot split {num_frames} frames into {num_segments} segments")
    # ceil(i * num_frames / num_segments) puts the longer segments first
    bounds = [-(-i * num_frames // num_segments) for i in range(num_segments + 1)]
    return SegmentPlan(boundaries=tuple(
        (bounds[i], bounds[i + 1]) for i in range(num_segments)))


def frame_scores(clip: Clip, actor: int | Sequence[int]) -> list[FrameScore]:
    """Confidence-sum score of the actor pose at every frame position.

    ``actor`` maps frame positions to pose indices (-1 when the actor is
    absent, scoring 0); an int is broadcast.
    """
    if isinstance(actor, int):
        actors = [actor] * len(clip.frames)
    else:
        actors = list(actor)
        if len(actors) != len(clip.frames):
            raise ValueError("actor map length must equal the frame count")
    scores = []
    for pos, frame in enumerate(clip.frames):
        ai = actors[pos]
        if 0 <= ai < len(frame.poses):
            score = confidence_sum(frame.poses[ai])
        else:
            score = 0.0
        scores.append(FrameScore(frame_index=pos, score=score))
    return scores


def informative_select(
    clip: Clip, actor: int | Sequence[int], plan: SegmentPlan,
) -> list[int]:
    """Pick, per segment, the frame position maximizing the actor's confidence sum.

    Ties break toward the lowest frame position; the result is strictly
    increasing.
    """
    scores = frame_scores(clip, actor)
    picks = []
    for start, stop in plan.boundaries:
        best = max(range(start, stop), key=lambda p: (scores[p].score, -p))
        picks.append(best)
    return picks


def uniform_select(num_frames: int, num_segments: int) -> list[int]:
    """Equal-interval sampling: the first frame of each planned segment."""
    plan = plan_segments(num_frames, num_segments)
    return [start for start, _ in plan.boundaries]


def select_actor(frame: Frame) -> int:
    """Index of the pose with the highest confidence sum (tie: lowest index)."""
    if not frame.poses:
        raise NoPersonError(f"frame {frame.index} has no poses")
    sums = [confidence_sum(p) for p in frame.poses]
    return max(range(len(sums)), key=lambda i: (sums[i], -i))
