"""Hemispherical viewpoint grid and the five-move action set."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Invalid grid dimensions or an index outside the grid."""


class Action(enum.Enum):
    STAY = "stay"
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"


ACTIONS: tuple[Action, ...] = tuple(Action)


@dataclass(frozen=True)
class GridDomain:
    """Uniform elevation x azimuth lattice on a sphere of ``radius``.

    Elevation rows include both ends of ``elev_range``. Azimuth columns are
    half-open over ``azim_range`` and wrap around when the range is a full
    turn; otherwise Left/Right clamp at the edges like Up/Down.
    """

    radius: float
    n_elev: int
    n_azim: int
    elev_range: tuple[float, float] = (0.0, math.pi / 2)
    azim_range: tuple[float, float] = (0.0, 2 * math.pi)

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GridError(f"radius must be positive, got {self.radius}")
        if self.n_elev < 2 or self.n_azim < 2:
            raise GridError(f"need n_elev >= 2 and n_azim >= 2, got {self.n_elev}x{self.n_azim}")
        if not self.elev_range[0] < self.elev_range[1]:
            raise GridError(f"empty elevation range {self.elev_range}")
        if not self.azim_range[0] < self.azim_range[1]:
            raise GridError(f"empty azimuth range {self.azim_range}")

    @property
    def size(self) -> int:
        return self.n_elev * self.n_azim

    @property
    def wraps(self) -> bool:
        span = self.azim_range[1] - self.azim_range[0]
        return math.isclose(span, 2 * math.pi, rel_tol=1e-12)

    @cached_property
    def elevations(self) -> np.ndarray:
        return np.linspace(self.elev_range[0], self.elev_range[1], self.n_elev)

    @cached_property
    def azimuths(self) -> np.ndarray:
        lo, hi = self.azim_range
        return lo + np.arange(self.n_azim) * (hi - lo) / self.n_azim

    @cached_property
    def positions(self) -> np.ndarray:
        """All node positions, shape ``(n_elev * n_azim, 3)``, row-major in (elev, azim)."""
        el = self.elevations[:, None]
        az = self.azimuths[None, :]
        xyz = np.stack(
            [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el) * np.ones_like(az)],
            axis=-1,
        )
        pts = self.radius * xyz.reshape(-1, 3)
        pts.setflags(write=False)
        return pts

    def flat_index(self, elev_idx: int, azim_idx: int) -> int:
        self._check(elev_idx, azim_idx)
        return elev_idx * self.n_azim + azim_idx

    def viewpoint(self, elev_idx: int, azim_idx: int) -> Viewpoint:
        pos = to_cartesian(self, elev_idx, azim_idx)
        return Viewpoint(elev_idx, azim_idx, tuple(float(c) for c in pos))

    def viewpoints(self) -> list[Viewpoint]:
        return [self.viewpoint(i, j) for i in range(self.n_elev) for j in range(self.n_azim)]

    def nearest(self, p) -> tuple[Viewpoint, float]:
        """Grid node closest to ``p`` (Euclidean) and the snap distance."""
        d = np.linalg.norm(self.positions - np.asarray(p, dtype=float), axis=1)
        k = int(np.argmin(d))
        return self.viewpoint(*divmod(k, self.n_azim)), float(d[k])

    def contains(self, v: Viewpoint) -> bool:
        return 0 <= v.elev_idx < self.n_elev and 0 <= v.azim_idx < self.n_azim

    def step_length(self) -> float:
        """Largest great-circle distance between a node and its grid neighbours."""
        d_el = self.radius * (self.elevations[1] - self.elevations[0])
        d_az = self.radius * (self.azimuths[1] - self.azimuths[0]) * math.cos(self.elevations.min())
        return float(max(d_el, d_az))

    def _check(self, elev_idx: int, azim_idx: int) -> None:
        if not (0 <= elev_idx < self.n_elev and 0 <= azim_idx < self.n_azim):
            raise GridError(
                f"index ({elev_idx}, {azim_idx}) outside {self.n_elev}x{self.n_azim} grid"
            )


@dataclass(frozen=True)
class Viewpoint:
    elev_idx: int
    azim_idx: int
    position: tuple[float, float, float]

    @property
    def p(self) -> np.ndarray:
        return np.array(self.position)


def build_grid(radius: float, n_elev: int, n_azim: int, **ranges) -> GridDomain:
    return GridDomain(float(radius), int(n_elev), int(n_azim), **ranges)


def to_cartesian(grid: GridDomain, elev_idx: int, azim_idx: int) -> np.ndarray:
    grid._check(elev_idx, azim_idx)
    el = grid.elevations[elev_idx]
    az = grid.azimuths[azim_idx]
    return grid.radius * np.array(
        [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
    )


def apply_action(grid: GridDomain, v: Viewpoint, a: Action) -> Viewpoint:
    """One grid move. Elevation clamps; azimuth wraps on a full-turn grid."""
    i, j = v.elev_idx, v.azim_idx
    if a is Action.STAY:
        return v
    if a is Action.UP:
        i += 1
    elif a is Action.DOWN:
        i -= 1
    elif a is Action.LEFT:
        j -= 1
    elif a is Action.RIGHT:
        j += 1
    if not 0 <= i < grid.n_elev:
        return v
    if grid.wraps:
        j %= grid.n_azim
    elif not 0 <= j < grid.n_azim:
        return v
    return grid.viewpoint(i, j)


def reachable_set(grid: GridDomain, v: Viewpoint) -> list[tuple[Action, Viewpoint]]:
    return [(a, apply_action(grid, v, a)) for a in ACTIONS]
