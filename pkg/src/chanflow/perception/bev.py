"""Bird's-eye-view rasterization of vehicle-frame point clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BevConfig", "BevMap", "rasterize_bev"]


@dataclass(frozen=True)
class BevConfig:
    """Grid geometry: ``grid_size`` cells per side covering [-extent, extent]^2."""

    grid_size: int = 64
    extent: float = 128.0

    @property
    def resolution(self):
        return 2.0 * self.extent / self.grid_size


@dataclass(frozen=True)
class BevMap:
    """Two-channel top-down grid: max height and log(1 + point count).

    ``grid[i, j]`` covers x in [-extent + i*res, -extent + (i+1)*res) and
    y likewise via j. Height is zero for empty cells.
    """

    grid: np.ndarray  # (H, W, 2)
    resolution: float
    extent: float


def rasterize_bev(points, cfg=BevConfig()):
    """Project vehicle-frame points onto the two-channel BEV grid.

    Points outside [-extent, extent)^2 are dropped. Channel 0 holds the
    max z per cell, channel 1 holds log(1 + count); the result depends only
    on the multiset of points, not their order.
    """
    n = cfg.grid_size
    grid = np.zeros((n, n, 2), dtype=np.float64)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0]:
        ij = np.floor((points[:, :2] + cfg.extent) / cfg.resolution).astype(np.int64)
        keep = (ij[:, 0] >= 0) & (ij[:, 0] < n) & (ij[:, 1] >= 0) & (ij[:, 1] < n)
        ij = ij[keep]
        z = points[keep, 2]
        if ij.shape[0]:
            flat = ij[:, 0] * n + ij[:, 1]
            heights = np.full(n * n, -np.inf)
            np.maximum.at(heights, flat, z)
            counts = np.zeros(n * n)
            np.add.at(counts, flat, 1.0)
            occupied = counts > 0
            grid[..., 0].reshape(-1)[occupied] = heights[occupied]
            grid[..., 1].reshape(-1)[occupied] = np.log1p(counts[occupied])
    return BevMap(grid=grid, resolution=cfg.resolution, extent=cfg.extent)
