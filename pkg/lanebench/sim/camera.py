"""
Camera Model
============

Renders the ego view as a small grayscale image: a pinhole camera looking at
a flat ground plane carrying the two lane boundaries and the center line,
with a uniform sky above the horizon. Weather and brightness effects are
applied afterwards, seeded per frame.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from lanebench.core.config import settings
from lanebench.schemas.domain import Scenario, Weather
from lanebench.schemas.simulation import SimConfig
from lanebench.sim.dynamics import VehicleState
from lanebench.sim.world import Road

# Behind-camera margin of the drawn road window, meters
WINDOW_BEHIND = 5.0
# Rendering uses every RENDER_STRIDE-th centerline sample
RENDER_STRIDE = 4


@dataclass(frozen=True)
class GroundRays:
    """Per-pixel ground intersections in the vehicle frame (X forward, Y left)."""
    ground: np.ndarray      # (H, W) bool
    X: np.ndarray           # (n_ground,)
    Y: np.ndarray           # (n_ground,)
    footprint: np.ndarray   # (n_ground,) lateral ground size of one pixel, meters


@lru_cache(maxsize=8)
def ground_rays(
    width: int,
    height: int,
    camera_height: float,
    pitch: float,
    fov_deg: float,
) -> GroundRays:
    """Back-project every pixel onto the ground plane."""
    f = (width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)
    cx = (width - 1) / 2.0
    cy = (height - 1) / 2.0
    cols = (np.arange(width) - cx) / f
    rows = (np.arange(height) - cy) / f
    u, v = np.meshgrid(cols, rows)

    # Camera axes in the vehicle frame (X forward, Y left, Z up)
    sin_p, cos_p = math.sin(pitch), math.cos(pitch)
    dir_x = cos_p - v * sin_p
    dir_y = -u
    dir_z = -sin_p - v * cos_p

    ground = dir_z < 0
    t = camera_height / -dir_z[ground]
    rays = GroundRays(
        ground=ground,
        X=t * dir_x[ground],
        Y=t * dir_y[ground],
        footprint=t / f,
    )
    for arr in (rays.ground, rays.X, rays.Y, rays.footprint):
        arr.setflags(write=False)
    return rays


def _marking_strength(road: Road, wx: np.ndarray, wy: np.ndarray, sigma: np.ndarray, s0: float) -> np.ndarray:
    """Gaussian lane-marking profile in [0, 1] for ground points in world coordinates."""
    lo = max(0, road.index_at(s0 - WINDOW_BEHIND))
    hi = min(road.n_samples - 1, road.index_at(s0 + settings.VIEW_RANGE) + 1)
    idx = np.arange(lo, hi + 1, RENDER_STRIDE)
    if idx[-1] != hi:
        idx = np.append(idx, hi)
    px, py = road.x[idx], road.y[idx]

    ax, ay = px[:-1], py[:-1]
    dx, dy = px[1:] - ax, py[1:] - ay
    seg_len2 = dx * dx + dy * dy

    qx = wx[:, None]
    qy = wy[:, None]
    raw_t = ((qx - ax) * dx + (qy - ay) * dy) / seg_len2
    t = np.clip(raw_t, 0.0, 1.0)
    fx = ax + t * dx
    fy = ay + t * dy
    dist2 = (qx - fx) ** 2 + (qy - fy) ** 2
    k = np.argmin(dist2, axis=1)
    rows = np.arange(wx.shape[0])

    cross = dx[k] * (qy[rows, 0] - fy[rows, k]) - dy[k] * (qx[rows, 0] - fx[rows, k])
    lateral = np.sqrt(dist2[rows, k])
    lateral = np.where(cross >= 0, lateral, -lateral)

    # Points whose foot falls outside the drawn window carry no marking
    kt = raw_t[rows, k]
    inside = ~(((k == 0) & (kt < 0.0)) | ((k == len(dx) - 1) & (kt > 1.0)))

    half = road.lane_width / 2.0
    two_var = 2.0 * sigma * sigma
    left = np.exp(-((lateral - half) ** 2) / two_var)
    center = np.exp(-(lateral ** 2) / two_var)
    right = np.exp(-((lateral + half) ** 2) / two_var)
    strength = np.maximum(np.maximum(left, right), center)
    return np.where(inside, strength, 0.0)


def render_clean(
    road: Road,
    state: VehicleState,
    cfg: Optional[SimConfig] = None,
    progress_index: Optional[int] = None,
) -> np.ndarray:
    """Weather-free camera image with intensities in [0, 1]."""
    cfg = cfg or SimConfig()
    rays = ground_rays(
        cfg.image_width,
        cfg.image_height,
        settings.CAMERA_HEIGHT,
        settings.CAMERA_PITCH,
        settings.CAMERA_FOV_DEG,
    )
    s0 = road.project(state.x, state.y, progress_index).s

    cos_h, sin_h = math.cos(state.heading), math.sin(state.heading)
    wx = state.x + rays.X * cos_h - rays.Y * sin_h
    wy = state.y + rays.X * sin_h + rays.Y * cos_h
    sigma = np.maximum(settings.MARKING_WIDTH / 2.0, rays.footprint)

    strength = _marking_strength(road, wx, wy, sigma, s0)
    ground_level = settings.GROUND_INTENSITY

    img = np.full((cfg.image_height, cfg.image_width), settings.SKY_INTENSITY, dtype=float)
    img[rays.ground] = ground_level + (1.0 - ground_level) * strength
    return img


def apply_weather(
    img: np.ndarray,
    weather: Union[Weather, str],
    intensity: float,
    brightness: float,
    seed: Union[int, list],
) -> np.ndarray:
    """
    Apply brightness and a weather effect to an image.

    Args:
        img: (H, W) intensities in [0, 1]
        weather: sunny, fog, rain or snow
        intensity: Effect strength in [0, 1]
        brightness: Global intensity scale in [0, 1]
        seed: Seed for the rain/snow noise

    Returns:
        New image clipped to [0, 1]
    """
    weather = Weather(weather)
    out = img * brightness
    if weather == Weather.FOG:
        out = (1.0 - intensity) * out + intensity
    elif weather == Weather.RAIN:
        rng = np.random.default_rng(seed)
        starts = rng.random(out.shape) < settings.RAIN_DENSITY * intensity
        streaks = np.zeros_like(starts)
        for offset in range(settings.RAIN_STREAK_LENGTH):
            streaks[offset:, :] |= starts[: out.shape[0] - offset, :]
        out = np.where(streaks, 0.5 * out + 0.5 * settings.RAIN_LEVEL, out)
    elif weather == Weather.SNOW:
        rng = np.random.default_rng(seed)
        specks = rng.random(out.shape) < settings.SNOW_DENSITY * intensity
        out = np.where(specks, 1.0, out)
    return np.clip(out, 0.0, 1.0)


def frame_seed(scenario: Scenario, frame_index: int) -> list:
    """Seed of the weather noise of one frame."""
    return [int(scenario.rng_seed), int(frame_index)]


def render(
    road: Road,
    state: VehicleState,
    scenario: Scenario,
    frame_index: int = 0,
    progress_index: Optional[int] = None,
    cfg: Optional[SimConfig] = None,
) -> np.ndarray:
    """
    Render the ego view of a scenario at a vehicle state.

    Raises:
        EndOfRoadError: if the vehicle lies beyond the road end
    """
    clean = render_clean(road, state, cfg, progress_index)
    img = apply_weather(
        clean,
        scenario.weather,
        scenario.weather_intensity,
        scenario.brightness,
        frame_seed(scenario, frame_index),
    )
    return quantize(img)


def quantize(img: np.ndarray) -> np.ndarray:
    """Snap intensities to the 8-bit levels frames are stored with."""
    return np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0


def write_pgm(img: np.ndarray, path: Union[str, Path]) -> None:
    """Write an image as binary PGM (maxval 255)."""
    pixels = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(pixels).save(Path(path), format="PPM")


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """Read a PGM frame back into [0, 1] intensities."""
    with Image.open(Path(path)) as pic:
        return np.asarray(pic.convert("L"), dtype=float) / 255.0
