"""
Road World
==========

Road geometry built from a scenario and the geometric queries the camera,
the oracle and the lane-departure metric need.

Conventions: x east, y north, heading counter-clockwise from +x, positive
curvature bends left, positive lateral deviation lies left of travel.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from lanebench.core.config import settings
from lanebench.core.exceptions import EndOfRoadError
from lanebench.schemas.domain import RoadTopology, Scenario

# Projection search window around a progress hint, in samples
HINT_BEHIND = 20
HINT_AHEAD = 60


@dataclass(frozen=True)
class ArcSegment:
    """Constant-curvature piece of the centerline."""
    s_start: float
    length: float
    kappa: float
    x0: float
    y0: float
    heading0: float


class Projection(NamedTuple):
    index: int          # segment index (sample index of its start)
    s: float            # arc position of the foot point
    deviation: float    # signed lateral deviation, left positive


def _integrate_arc(ds: np.ndarray, kappa: float, x0: float, y0: float, heading0: float):
    """Closed-form pose along a constant-curvature arc."""
    heading = heading0 + kappa * ds
    if kappa == 0.0:
        x = x0 + ds * math.cos(heading0)
        y = y0 + ds * math.sin(heading0)
    else:
        x = x0 + (np.sin(heading) - math.sin(heading0)) / kappa
        y = y0 - (np.cos(heading) - math.cos(heading0)) / kappa
    return x, y, heading


@dataclass(frozen=True, eq=False)
class Road:
    """Arc-length parameterized centerline sampled every ``arc_step`` meters."""
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    curvature: np.ndarray
    lane_width: float
    total_length: float
    arc_step: float
    segments: Tuple[ArcSegment, ...]

    @property
    def n_samples(self) -> int:
        return int(self.s.shape[0])

    def point_at(self, s_query: float) -> Tuple[float, float, float]:
        """
        Exact centerline pose at an arc position.

        Raises:
            EndOfRoadError: if s_query lies beyond the road end
        """
        if s_query > self.total_length + 1e-9:
            raise EndOfRoadError(
                f"arc position {s_query:.3f} m beyond road end {self.total_length:.3f} m",
                s=s_query,
            )
        s_query = max(0.0, s_query)
        seg = self.segments[-1]
        for candidate in self.segments:
            if s_query <= candidate.s_start + candidate.length:
                seg = candidate
                break
        x, y, heading = _integrate_arc(
            np.asarray(s_query - seg.s_start), seg.kappa, seg.x0, seg.y0, seg.heading0
        )
        return float(x), float(y), float(heading)

    def index_at(self, s_query: float) -> int:
        """Index of the last sample at or before an arc position."""
        idx = int(np.searchsorted(self.s, s_query, side="right")) - 1
        return min(max(idx, 0), self.n_samples - 2)

    def project(self, x: float, y: float, hint: Optional[int] = None) -> Projection:
        """
        Project a point onto the centerline polyline.

        Args:
            x, y: Query point in world coordinates
            hint: Segment index near the expected foot point; restricts the
                search to a window so self-overlapping roads stay unambiguous

        Returns:
            Projection with segment index, arc position and signed deviation

        Raises:
            EndOfRoadError: if the point projects beyond the last sample
        """
        n_seg = self.n_samples - 1
        if hint is None:
            lo, hi = 0, n_seg
        else:
            lo = max(0, hint - HINT_BEHIND)
            hi = min(n_seg, hint + HINT_AHEAD)

        px, py = self.x[lo:hi], self.y[lo:hi]
        dx = self.x[lo + 1:hi + 1] - px
        dy = self.y[lo + 1:hi + 1] - py
        seg_len2 = dx * dx + dy * dy
        raw_t = ((x - px) * dx + (y - py) * dy) / seg_len2
        t = np.clip(raw_t, 0.0, 1.0)
        fx = px + t * dx
        fy = py + t * dy
        dist2 = (x - fx) ** 2 + (y - fy) ** 2

        k = int(np.argmin(dist2))
        idx = lo + k
        if idx == n_seg - 1 and raw_t[k] > 1.0 + 1e-9:
            raise EndOfRoadError(
                f"point ({x:.2f}, {y:.2f}) projects beyond road end",
                x=x,
                y=y,
            )

        cross = dx[k] * (y - fy[k]) - dy[k] * (x - fx[k])
        distance = math.sqrt(float(dist2[k]))
        deviation = distance if cross >= 0 else -distance
        s_foot = float(self.s[idx] + t[k] * (self.s[idx + 1] - self.s[idx]))
        return Projection(index=idx, s=s_foot, deviation=float(deviation))


def _curvature_plan(scenario: Scenario):
    """Per-segment (length, signed curvature) for a scenario's topology."""
    length = scenario.road_length
    kappa = scenario.effective_curvature
    topology = scenario.road_topology
    if topology == RoadTopology.STRAIGHT:
        return [(length, 0.0)]
    if topology == RoadTopology.LEFT_CURVED:
        return [(length, kappa)]
    if topology == RoadTopology.RIGHT_CURVED:
        return [(length, -kappa)]
    # s-curve: left half, then right half
    return [(length / 2.0, kappa), (length / 2.0, -kappa)]


def build_road(scenario: Scenario, arc_step: Optional[float] = None) -> Road:
    """
    Lay out the centerline of a scenario's road starting at the origin, heading east.

    Args:
        scenario: Scenario defining topology, curvature, length and lane width
        arc_step: Sample spacing in meters (defaults to settings.ARC_STEP)

    Returns:
        Immutable Road
    """
    arc_step = arc_step or settings.ARC_STEP
    total = float(scenario.road_length)

    n_full = int(math.floor(total / arc_step + 1e-9))
    s = np.arange(n_full + 1, dtype=float) * arc_step
    if total - s[-1] > 1e-9:
        s = np.append(s, total)
    s[-1] = min(s[-1], total)

    x = np.empty_like(s)
    y = np.empty_like(s)
    heading = np.empty_like(s)
    curvature = np.empty_like(s)

    segments = []
    s_start, x0, y0, h0 = 0.0, 0.0, 0.0, 0.0
    plan = _curvature_plan(scenario)
    for i, (seg_len, kappa) in enumerate(plan):
        last = i == len(plan) - 1
        segments.append(ArcSegment(s_start, seg_len, kappa, x0, y0, h0))
        if last:
            mask = s >= s_start
        else:
            mask = (s >= s_start) & (s < s_start + seg_len)
        sx, sy, sh = _integrate_arc(s[mask] - s_start, kappa, x0, y0, h0)
        x[mask], y[mask], heading[mask] = sx, sy, sh
        curvature[mask] = kappa
        ex, ey, eh = _integrate_arc(np.asarray(seg_len), kappa, x0, y0, h0)
        s_start, x0, y0, h0 = s_start + seg_len, float(ex), float(ey), float(eh)

    return Road(
        s=s,
        x=x,
        y=y,
        heading=heading,
        curvature=curvature,
        lane_width=float(scenario.lane_width),
        total_length=total,
        arc_step=arc_step,
        segments=tuple(segments),
    )


def lateral_deviation(road: Road, x: float, y: float, hint: Optional[int] = None) -> float:
    """Signed distance from the centerline, positive left of travel."""
    return road.project(x, y, hint).deviation
