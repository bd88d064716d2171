"""Synthetic four-view inverse-depth renders of a vehicle-frame scene.

Stand-in for RGB cameras: four 90-degree views facing +x, -x, +y and -y.
Each scatterer inside a view frustum splats 1/distance at its projected
pixel; overlapping splats keep the maximum (nearest point wins).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ViewConfig", "render_views", "VIEW_NAMES"]

VIEW_NAMES = ("front", "back", "left", "right")


@dataclass(frozen=True)
class ViewConfig:
    """Square image size per view; the FOV is fixed at 90 degrees."""

    image_size: int = 32


def _view_coords(points):
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    # (depth, lateral) per view facing +x, -x, +y, -y.
    return (
        (x, y),
        (-x, -y),
        (y, -x),
        (-y, x),
    )


def render_views(aligned, cfg=ViewConfig()):
    """Render the four inverse-depth splat images of an aligned scene.

    Returns an array (4, H, W) ordered front, back, left, right. A point
    projects into a view when its depth along the view axis is positive
    and both the lateral and vertical offsets stay within the 90-degree
    frustum (|offset| <= depth).
    """
    size = cfg.image_size
    images = np.zeros((4, size, size), dtype=np.float64)
    points = np.asarray(aligned.scatterers_local, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        return images
    dist = np.linalg.norm(points, axis=1)
    valid_dist = dist > 1e-9
    z = points[:, 2]

    for v, (depth, lateral) in enumerate(_view_coords(points)):
        inside = valid_dist & (depth > 0) & (np.abs(lateral) <= depth) & (np.abs(z) <= depth)
        if not inside.any():
            continue
        d = depth[inside]
        col = np.rint((lateral[inside] / d + 1.0) / 2.0 * (size - 1)).astype(np.int64)
        row = np.rint((1.0 - (z[inside] / d + 1.0) / 2.0) * (size - 1)).astype(np.int64)
        flat = row * size + col
        np.maximum.at(images[v].reshape(-1), flat, 1.0 / dist[inside])
    return images
