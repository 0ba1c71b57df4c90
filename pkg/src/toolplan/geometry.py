"""Axis-aligned box helpers shared by the scene model and the simulator.

Boxes are ``(lo, hi)`` pairs of length-3 numpy arrays.  Footprints are the
``(xmin, ymin, xmax, ymax)`` projection of a box onto the floor plane.
"""

from __future__ import annotations

import math

import numpy as np

EPS = 1e-9


def world_extents(size, yaw: float) -> np.ndarray:
    """Axis-aligned extents of a box of ``size`` rotated by ``yaw`` about z."""
    w, l, h = (float(v) for v in size)
    c, s = abs(math.cos(yaw)), abs(math.sin(yaw))
    # snap so that a quarter turn swaps extents exactly
    if c < 1e-12:
        c = 0.0
    if s < 1e-12:
        s = 0.0
    return np.array([c * w + s * l, s * w + c * l, h])


def box_of(position, size, yaw: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    half = world_extents(size, yaw) / 2.0
    p = np.asarray(position, dtype=float)
    return p - half, p + half


def union(boxes) -> tuple[np.ndarray, np.ndarray]:
    boxes = list(boxes)
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    return lo, hi


def overlap_depths(a, b) -> np.ndarray:
    """Per-axis overlap length (negative means separated)."""
    return np.minimum(a[1], b[1]) - np.maximum(a[0], b[0])


def xy_overlap(a, b, tol: float = EPS) -> bool:
    d = overlap_depths(a, b)
    return bool(d[0] > tol and d[1] > tol)


def penetrates(a, b, z_tol: float = EPS, xy_tol: float = EPS) -> bool:
    """True if the boxes share volume, requiring more than ``z_tol`` of z overlap."""
    d = overlap_depths(a, b)
    return bool(d[0] > xy_tol and d[1] > xy_tol and d[2] > z_tol)


def box_distance(a, b) -> float:
    """Euclidean gap between two boxes (0 when touching or overlapping)."""
    gap = np.maximum(0.0, np.maximum(a[0] - b[1], b[0] - a[1]))
    return float(np.linalg.norm(gap))


def footprint(box) -> tuple[float, float, float, float]:
    lo, hi = box
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def rect_contains(rect, x: float, y: float, tol: float = EPS) -> bool:
    xmin, ymin, xmax, ymax = rect
    return xmin - tol <= x <= xmax + tol and ymin - tol <= y <= ymax + tol


def wrap_angle(a: float) -> float:
    """Wrap to [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi
