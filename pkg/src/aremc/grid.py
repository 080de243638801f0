"""Hexagonal TX/RX lattice geometry.

Cell centers are addressed by integer offset coordinates ``(xp, yp)`` on a
60-degree basis.  The squared distance to the origin in units of ``d_hex``
is the integer ``xp**2 + yp**2 + xp*yp``, which is used as an exact sort
and grouping key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SQRT3 = math.sqrt(3.0)

# Neighbor steps in counter-clockwise order (30, 90, 150, 210, 270, 330 deg).
HEX_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


class OffsetCoord(NamedTuple):
    xp: int
    yp: int

    @property
    def norm2(self) -> int:
        """Squared distance to the origin in units of ``d_hex**2``."""
        return self.xp * self.xp + self.yp * self.yp + self.xp * self.yp

    @property
    def ring(self) -> int:
        return max(abs(self.xp), abs(self.yp), abs(self.xp + self.yp))


class Interferer(NamedTuple):
    index: int
    coord: OffsetCoord
    distance: float


def _check_d_hex(d_hex: float) -> None:
    if not d_hex > 0:
        raise ValueError(f"d_hex must be positive, got {d_hex!r}")


def offset_to_cartesian(c, d_hex: float) -> tuple[float, float]:
    """Map an offset coordinate to Cartesian ``(x, y)`` in meters."""
    _check_d_hex(d_hex)
    xp, yp = c
    return d_hex * (SQRT3 / 2.0) * xp, d_hex * (yp + 0.5 * xp)


def distance_from_origin(c, d_hex: float) -> float:
    _check_d_hex(d_hex)
    xp, yp = c
    return d_hex * math.sqrt(xp * xp + yp * yp + xp * yp)


def hex_ring(k: int) -> list[OffsetCoord]:
    """Cells of ring ``k`` walked along the six directions, ``k`` steps each."""
    if k < 0:
        raise ValueError("ring index must be non-negative")
    if k == 0:
        return [OffsetCoord(0, 0)]
    xp, yp = k * HEX_DIRECTIONS[4][0], k * HEX_DIRECTIONS[4][1]
    cells = []
    for dx, dy in HEX_DIRECTIONS:
        for _ in range(k):
            cells.append(OffsetCoord(xp, yp))
            xp, yp = xp + dx, yp + dy
    return cells


@dataclass(frozen=True)
class GridLayout:
    """Reference cell plus ``n_rings`` rings of interferers.

    ``interferers`` is sorted by distance, ties broken lexicographically on
    ``(xp, yp)``; index 0 is reserved for TX0 so interferers start at 1.
    """

    d_hex: float
    n_rings: int
    interferers: tuple[Interferer, ...]

    def __len__(self) -> int:
        return len(self.interferers)

    @property
    def coords(self) -> np.ndarray:
        return np.array([it.coord for it in self.interferers], dtype=int).reshape(-1, 2)

    @property
    def distances(self) -> np.ndarray:
        return np.array([it.distance for it in self.interferers], dtype=float)

    def interferer(self, index: int) -> Interferer:
        """Look up ``TX_index`` (1-based, as in the distance ordering)."""
        if not 1 <= index <= len(self.interferers):
            raise IndexError(f"no interferer TX{index} in a {self.n_rings}-ring layout")
        return self.interferers[index - 1]


def build_layout(d_hex: float, n_rings: int) -> GridLayout:
    _check_d_hex(d_hex)
    if n_rings < 0:
        raise ValueError("n_rings must be non-negative")
    cells = [c for k in range(1, n_rings + 1) for c in hex_ring(k)]
    cells.sort(key=lambda c: (c.norm2, c.xp, c.yp))
    interferers = tuple(
        Interferer(i, c, d_hex * math.sqrt(c.norm2)) for i, c in enumerate(cells, start=1)
    )
    return GridLayout(d_hex=float(d_hex), n_rings=n_rings, interferers=interferers)


def distance_classes(layout: GridLayout) -> list[tuple[float, int]]:
    """Group interferers by distance.

    Lattice distances are ``d_hex * sqrt(m)`` for integer ``m``, so grouping is
    done on ``m`` exactly rather than on floating point distances.

    Returns
    -------
    list of (distance, multiplicity)
        Strictly increasing distances; multiplicities sum to ``len(layout)``.
    """
    classes: list[tuple[float, int]] = []
    last_key = None
    for it in layout.interferers:
        key = it.coord.norm2
        if key == last_key:
            d, n = classes[-1]
            classes[-1] = (d, n + 1)
        else:
            classes.append((layout.d_hex * math.sqrt(key), 1))
            last_key = key
    return classes


def cell_area(d_hex: float) -> float:
    """Area of one hexagonal cell, ``sqrt(3)/2 * d_hex**2``."""
    _check_d_hex(d_hex)
    return SQRT3 / 2.0 * d_hex * d_hex
