"""Driving-scenario schema, corpus I/O and static road feature extraction.

A scenario is described only by the segments of its driving path. The
sixteen features computed here are the general road characteristics
(distances and turn counts) followed by order statistics over the angle
and pivot radius of the turn segments.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

FEATURE_NAMES = (
    "direct_distance",
    "road_distance",
    "num_left_turns",
    "num_right_turns",
    "num_straight",
    "total_angle",
    "median_angle",
    "std_angle",
    "max_angle",
    "min_angle",
    "mean_angle",
    "median_pivot",
    "std_pivot",
    "max_pivot",
    "min_pivot",
    "mean_pivot",
)
FEATURE_IDS = tuple(f"F{i}" for i in range(1, len(FEATURE_NAMES) + 1))
N_FEATURES = len(FEATURE_NAMES)


class CorpusError(ValueError):
    """Raised when a scenario corpus cannot be loaded or violates the schema."""


class SegmentKind(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    STRAIGHT = "straight"

    @property
    def is_turn(self) -> bool:
        return self is not SegmentKind.STRAIGHT


class Label(str, enum.Enum):
    SAFE = "safe"
    UNSAFE = "unsafe"


@dataclass(frozen=True)
class RoadSegment:
    kind: SegmentKind
    angle_deg: float
    pivot_radius: float
    length: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SegmentKind(self.kind))
        if not self.length > 0:
            raise ValueError(f"segment length must be positive, got {self.length}")
        if self.kind.is_turn:
            if not (self.angle_deg > 0 and self.pivot_radius > 0):
                raise ValueError(
                    f"{self.kind.value} turn needs positive angle and pivot radius, "
                    f"got angle={self.angle_deg} pivot={self.pivot_radius}"
                )
        elif self.angle_deg != 0 or self.pivot_radius != 0:
            raise ValueError("straight segment must have zero angle and pivot radius")


@dataclass(frozen=True)
class RoadScenario:
    id: str
    segments: tuple[RoadSegment, ...]
    start_point: tuple[float, float]
    end_point: tuple[float, float]
    cost: float
    label: Label | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "start_point", tuple(map(float, self.start_point)))
        object.__setattr__(self, "end_point", tuple(map(float, self.end_point)))
        if self.label is not None:
            object.__setattr__(self, "label", Label(self.label))
        if not self.segments:
            raise ValueError(f"scenario {self.id!r} has no segments")
        if not self.cost > 0:
            raise ValueError(f"scenario {self.id!r} has nonpositive cost {self.cost}")

    @property
    def is_unsafe(self) -> bool:
        return self.label is Label.UNSAFE


def _stats(values: list[float]) -> tuple[float, float, float, float, float]:
    """median, population std, max, min, mean; all zero for an empty list."""
    if not values:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    arr = np.asarray(values, dtype=float)
    return (
        float(np.median(arr)),
        float(np.std(arr)),
        float(arr.max()),
        float(arr.min()),
        float(arr.mean()),
    )


def extract_features(s: RoadScenario) -> np.ndarray:
    """Return the 16 road features F1..F16 of ``s`` as a float array."""
    direct = math.dist(s.start_point, s.end_point)
    road = math.fsum(seg.length for seg in s.segments)
    turns = [seg for seg in s.segments if seg.kind.is_turn]
    n_left = sum(seg.kind is SegmentKind.LEFT for seg in s.segments)
    n_right = sum(seg.kind is SegmentKind.RIGHT for seg in s.segments)
    n_straight = len(s.segments) - n_left - n_right
    # sorted so the aggregates do not depend on segment order
    angles = sorted(seg.angle_deg for seg in turns)
    pivots = sorted(seg.pivot_radius for seg in turns)
    total_angle = math.fsum(angles)
    return np.array(
        [direct, road, n_left, n_right, n_straight, total_angle, *_stats(angles), *_stats(pivots)],
        dtype=float,
    )


def feature_matrix(scenarios: Sequence[RoadScenario]) -> np.ndarray:
    if not scenarios:
        return np.empty((0, N_FEATURES))
    return np.vstack([extract_features(s) for s in scenarios])


# --- corpus file format -----------------------------------------------------

_REQUIRED = ("id", "start", "end", "cost_s", "segments")
_SEGMENT_REQUIRED = ("kind", "angle_deg", "pivot_radius", "length")


def _point(value: Any, field: str, index: int) -> tuple[float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise CorpusError(f"record {index}: field {field!r} must be [x, y]")
    return float(value[0]), float(value[1])


def scenario_from_dict(obj: Any, index: int = 0) -> RoadScenario:
    if not isinstance(obj, dict):
        raise CorpusError(f"record {index}: expected an object")
    for field in _REQUIRED:
        if field not in obj:
            raise CorpusError(f"record {index}: missing required field {field!r}")
    segments = []
    for k, seg in enumerate(obj["segments"]):
        if not isinstance(seg, dict):
            raise CorpusError(f"record {index}: segment {k} must be an object")
        for field in _SEGMENT_REQUIRED:
            if field not in seg:
                raise CorpusError(
                    f"record {index}: segment {k} missing required field {field!r}"
                )
        try:
            segments.append(
                RoadSegment(
                    kind=SegmentKind(seg["kind"]),
                    angle_deg=float(seg["angle_deg"]),
                    pivot_radius=float(seg["pivot_radius"]),
                    length=float(seg["length"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise CorpusError(f"record {index}: segment {k}: {exc}") from None
    label = obj.get("label")
    try:
        return RoadScenario(
            id=str(obj["id"]),
            segments=tuple(segments),
            start_point=_point(obj["start"], "start", index),
            end_point=_point(obj["end"], "end", index),
            cost=float(obj["cost_s"]),
            label=None if label is None else Label(label),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, CorpusError):
            raise
        raise CorpusError(f"record {index}: {exc}") from None


def scenario_to_dict(s: RoadScenario) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": s.id,
        "start": list(s.start_point),
        "end": list(s.end_point),
        "cost_s": s.cost,
    }
    if s.label is not None:
        out["label"] = s.label.value
    out["segments"] = [
        {
            "kind": seg.kind.value,
            "angle_deg": seg.angle_deg,
            "pivot_radius": seg.pivot_radius,
            "length": seg.length,
        }
        for seg in s.segments
    ]
    return out


def parse_corpus(data: Any) -> list[RoadScenario]:
    if not isinstance(data, list):
        raise CorpusError("corpus must be a JSON array of scenario objects")
    scenarios = [scenario_from_dict(obj, i) for i, obj in enumerate(data)]
    seen: set[str] = set()
    for i, s in enumerate(scenarios):
        if s.id in seen:
            raise CorpusError(f"record {i}: duplicate id {s.id!r}")
        seen.add(s.id)
    return scenarios


def load_corpus(path: str | Path) -> list[RoadScenario]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON: {exc}") from None
    return parse_corpus(data)


def dump_corpus(scenarios: Iterable[RoadScenario], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([scenario_to_dict(s) for s in scenarios], fh, indent=1)
        fh.write("\n")


def matrix_to_csv(ids: Sequence[str], matrix: np.ndarray, header: Sequence[str]) -> str:
    """Render an id-labelled matrix as CSV with round-trip float precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", *header])
    for row_id, row in zip(ids, matrix):
        writer.writerow([row_id, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def features_csv(scenarios: Sequence[RoadScenario]) -> str:
    return matrix_to_csv([s.id for s in scenarios], feature_matrix(scenarios), FEATURE_IDS)
