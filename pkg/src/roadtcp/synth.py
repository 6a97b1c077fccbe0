"""Synthetic labelled scenario corpora for desk-scale experiments.

Ordinary roads mix gentle turns with straights. A share of roads is drawn
around a few tight-curvature archetypes (hairpins, left/right chains). Labels
come from a curvature risk score thresholded at the quantile that yields
the requested unsafe ratio, so unsafe tests concentrate in a few compact
regions of feature space and tend to be short, hence cheap.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .scenario import (
    Label,
    RoadScenario,
    RoadSegment,
    SegmentKind,
    extract_features,
    scenario_to_dict,
)

# Observed feature ranges of real generated suites. F11 is left out: its
# reported range is inconsistent with the median and min angle ranges.
FEATURE_RANGES: dict[int, tuple[float, float]] = {
    0: (0, 490),
    1: (56, 3318),
    2: (0, 18),
    3: (0, 17),
    4: (0, 11),
    5: (105, 6420),
    6: (30, 330),
    7: (0, 150),
    8: (60, 345),
    9: (15, 285),
    11: (7, 47),
    12: (0, 23),
    13: (7, 47),
    14: (2, 47),
    15: (7, 47),
}

RATIO_TOLERANCE = 0.02
_MAX_TRIES = 200


@dataclass(frozen=True)
class BenchConfig:
    n_tests: int = 500
    unsafe_ratio: float = 0.26
    cluster_tightness: float = 0.15
    cost_range: tuple[float, float] = (10.0, 300.0)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cost_range", tuple(float(c) for c in self.cost_range))
        if self.n_tests < 2:
            raise ValueError("n_tests must be at least 2")
        if not 0.0 < self.unsafe_ratio < 1.0:
            raise ValueError("unsafe_ratio must lie strictly between 0 and 1")
        if not self.cluster_tightness > 0:
            raise ValueError("cluster_tightness must be positive")
        lo, hi = self.cost_range
        if not 0 < lo < hi:
            raise ValueError("cost_range must satisfy 0 < min < max")


@dataclass(frozen=True)
class _Archetype:
    turns: float  # mean number of turn segments
    angle: float  # mean turn angle, degrees
    angle_spread: float
    pivot: float  # mean pivot radius
    pivot_spread: float
    left_share: float
    straights: float  # mean number of straight segments
    straight_len: float


_ORDINARY = _Archetype(6, 60, 25, 30, 10, 0.5, 5, 80)
_RISKY = (
    _Archetype(5, 250, 30, 9, 1.5, 0.5, 1, 25),  # hairpins
    _Archetype(8, 150, 20, 10, 1.5, 0.85, 1, 25),  # left chain
    _Archetype(8, 150, 20, 10, 1.5, 0.15, 1, 25),  # right chain
)


def _jitter(rng: np.random.Generator, value: float, rel: float) -> float:
    return value * max(0.2, 1.0 + rel * rng.standard_normal())


def _draw_segments(rng: np.random.Generator, arch: _Archetype, rel: float) -> list[RoadSegment]:
    n_turns = max(2, int(round(_jitter(rng, arch.turns, rel))))
    n_straight = int(rng.poisson(arch.straights))
    angle_mu = _jitter(rng, arch.angle, rel)
    pivot_mu = _jitter(rng, arch.pivot, rel)
    segments = []
    for _ in range(n_turns):
        angle = float(np.clip(round(rng.normal(angle_mu, arch.angle_spread) / 5) * 5, 15, 345))
        pivot = float(np.clip(round(rng.normal(pivot_mu, arch.pivot_spread), 1), 2, 47))
        kind = SegmentKind.LEFT if rng.random() < arch.left_share else SegmentKind.RIGHT
        segments.append(RoadSegment(kind, angle, pivot, math.radians(angle) * pivot))
    for _ in range(n_straight):
        length = float(round(rng.uniform(0.5, 1.5) * arch.straight_len, 1))
        segments.append(RoadSegment(SegmentKind.STRAIGHT, 0.0, 0.0, length))
    rng.shuffle(segments)
    return segments


def _walk(segments: list[RoadSegment]) -> tuple[float, float]:
    """End point of the driving path starting at the origin heading +x."""
    x = y = heading = 0.0
    for seg in segments:
        if seg.kind is SegmentKind.STRAIGHT:
            x += seg.length * math.cos(heading)
            y += seg.length * math.sin(heading)
            continue
        turn = math.radians(seg.angle_deg) * (1 if seg.kind is SegmentKind.LEFT else -1)
        chord = 2 * seg.pivot_radius * math.sin(abs(turn) / 2)
        x += chord * math.cos(heading + turn / 2)
        y += chord * math.sin(heading + turn / 2)
        heading += turn
    return x, y


def in_feature_ranges(features: np.ndarray) -> bool:
    return all(lo <= features[i] <= hi for i, (lo, hi) in FEATURE_RANGES.items())


def risk_score(features: np.ndarray) -> float:
    """Curvature risk from max angle, min pivot radius and turns per 100 units."""
    n_turns = features[2] + features[3]
    density = 100.0 * n_turns / features[1]
    return features[8] / 90.0 + 40.0 / features[14] + density


def _cost(rng: np.random.Generator, road_length: float, cost_range: tuple[float, float]) -> float:
    lo, hi = cost_range
    lo_len, hi_len = FEATURE_RANGES[1]
    share = (road_length - lo_len) / (hi_len - lo_len)
    raw = (lo + (hi - lo) * share) * (1.0 + 0.1 * rng.standard_normal())
    return float(round(min(max(raw, lo), hi), 3))


def generate_corpus(cfg: BenchConfig) -> tuple[list[RoadScenario], dict[str, Any]]:
    """Return the scenarios and a manifest with the achieved statistics."""
    rng = np.random.default_rng(cfg.rng_seed)
    drafts = []
    for i in range(cfg.n_tests):
        risky = rng.random() < cfg.unsafe_ratio
        arch = _RISKY[int(rng.integers(len(_RISKY)))] if risky else _ORDINARY
        rel = cfg.cluster_tightness if risky else 0.25
        for _ in range(_MAX_TRIES):
            segments = _draw_segments(rng, arch, rel)
            end = _walk(segments)
            draft = RoadScenario(f"T{i:05d}", tuple(segments), (0.0, 0.0), end, 1.0)
            feats = extract_features(draft)
            if in_feature_ranges(feats):
                break
        else:
            raise RuntimeError(f"could not draw an in-range scenario for test {i}")
        drafts.append((draft, feats))

    risk = np.array([risk_score(f) for _, f in drafts])
    n_unsafe = int(round(cfg.unsafe_ratio * cfg.n_tests))
    threshold = np.sort(risk)[::-1][n_unsafe - 1] if n_unsafe else np.inf
    scenarios = [
        RoadScenario(
            draft.id,
            draft.segments,
            draft.start_point,
            draft.end_point,
            _cost(rng, feats[1], cfg.cost_range),
            Label.UNSAFE if r >= threshold else Label.SAFE,
        )
        for (draft, feats), r in zip(drafts, risk)
    ]
    achieved = sum(s.is_unsafe for s in scenarios) / cfg.n_tests
    within = abs(achieved - cfg.unsafe_ratio) <= RATIO_TOLERANCE
    if not within:
        warnings.warn(
            f"achieved unsafe ratio {achieved:.4f} misses target {cfg.unsafe_ratio}",
            stacklevel=2,
        )
    manifest = {
        "config": asdict(cfg),
        "n_tests": cfg.n_tests,
        "n_unsafe": sum(s.is_unsafe for s in scenarios),
        "achieved_unsafe_ratio": achieved,
        "ratio_within_tolerance": within,
        "risk_threshold": float(threshold),
        "total_cost_s": math.fsum(s.cost for s in scenarios),
    }
    return scenarios, manifest


def write_corpus(scenarios: list[RoadScenario], manifest: dict[str, Any], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus_path = out / "corpus.json"
    corpus_path.write_text(
        json.dumps([scenario_to_dict(s) for s in scenarios], indent=1) + "\n", encoding="utf-8"
    )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return corpus_path
