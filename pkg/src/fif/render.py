"""Scatter rasterisation to binary PPM (P6)."""
from __future__ import annotations

import colorsys
import re
from dataclasses import dataclass

import numpy as np

from .attractor import PointCloud
from .errors import WindowDegenerate

MAX_SIDE = 16384
WHITE = (255, 255, 255)
BLACK = (0, 0, 0)


@dataclass(frozen=True)
class Window:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    width: int = 800
    height: int = 800

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise WindowDegenerate(f"empty window [{self.x_lo}, {self.x_hi}] x [{self.y_lo}, {self.y_hi}]")
        if not (0 < self.width <= MAX_SIDE and 0 < self.height <= MAX_SIDE):
            raise WindowDegenerate(f"image size {self.width}x{self.height} outside 1..{MAX_SIDE}")

    @classmethod
    def parse(cls, bounds: str, size: str = "800x800"):
        """From ``"xlo,xhi,ylo,yhi"`` and ``"WxH"``."""
        try:
            x_lo, x_hi, y_lo, y_hi = (float(v) for v in bounds.split(","))
            w, h = (int(v) for v in size.lower().split("x"))
        except ValueError:
            raise WindowDegenerate(f"cannot parse window {bounds!r} / size {size!r}") from None
        return cls(x_lo, x_hi, y_lo, y_hi, w, h)

    def pixels(self, pts):
        """Column and row indices of the points inside the window."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        inside = (x >= self.x_lo) & (x <= self.x_hi) & (y >= self.y_lo) & (y <= self.y_hi)
        x, y = x[inside], y[inside]
        px = np.floor((x - self.x_lo) / (self.x_hi - self.x_lo) * self.width).astype(np.int64)
        py = np.floor((y - self.y_lo) / (self.y_hi - self.y_lo) * self.height).astype(np.int64)
        px = np.clip(px, 0, self.width - 1)
        row = self.height - 1 - np.clip(py, 0, self.height - 1)
        return px, row


def hue_color(index, count):
    """Fully saturated color with hue ``index / count``."""
    r, g, b = colorsys.hsv_to_rgb(index / max(count, 1), 1.0, 1.0)
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def rasterize(layers, window: Window) -> bytes:
    """Draw ``(cloud, (r, g, b))`` layers in order on white; returns PPM bytes."""
    img = np.full((window.height, window.width, 3), 255, dtype=np.uint8)
    for cloud, color in layers:
        pts = cloud.points if isinstance(cloud, PointCloud) else cloud
        px, row = window.pixels(pts)
        img[row, px] = color
    header = f"P6\n{window.width} {window.height}\n255\n".encode("ascii")
    return header + img.tobytes()


def ensemble_layers(attractor, clouds):
    """Continuations in hue order under the attractor drawn in black."""
    layers = [(c, hue_color(i, len(clouds))) for i, c in enumerate(clouds)]
    layers.append((attractor, BLACK))
    return layers


def read_ppm(data: bytes):
    """Parse P6 bytes into a ``(height, width, 3)`` array."""
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+255\s", data)
    if not m:
        raise ValueError("not a P6 image with maxval 255")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=m.end()).reshape(h, w, 3)
