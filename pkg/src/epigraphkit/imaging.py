"""Image loading, quantization, kernel tiling, and synthetic test images.

Images are numpy-backed value types: pixel grids are copied on construction
and treated as immutable snapshots. Gray levels run from 0 (ink) to
``levels - 1`` (background) once quantized.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ConfigError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

DEFAULT_LEVELS = 16


def kernel_id(x: int, y: int, w: int, h: int) -> str:
    """Stable identifier for a window at origin (x, y) with size (w, h)."""
    return f"x{x}y{y}w{w}h{h}"


def parse_kernel_id(kid: str) -> tuple[int, int, int, int]:
    """Inverse of :func:`kernel_id`; returns (x, y, w, h)."""
    try:
        body = kid.lstrip("x")
        xs, rest = body.split("y", 1)
        ys, rest = rest.split("w", 1)
        ws, hs = rest.split("h", 1)
        return int(xs), int(ys), int(ws), int(hs)
    except ValueError as exc:
        raise ConfigError(f"malformed kernel id {kid!r}") from exc


@dataclass(frozen=True, eq=False)
class RgbImage:
    """Color raster, pixel grid of shape (height, width, 3), uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ConfigError(f"RGB pixel grid must have shape (h, w, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ConfigError("image must be at least 1x1")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel raster, intensities in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2:
            raise ConfigError(f"gray pixel grid must be 2-D, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ConfigError("image must be at least 1x1")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class QuantizedImage:
    """Raster reduced to ``levels`` gray levels; every pixel is in [0, levels)."""

    pixels: np.ndarray
    levels: int

    def __post_init__(self):
        if not 2 <= self.levels <= 256:
            raise ConfigError(f"levels must be in [2, 256], got {self.levels}")
        px = np.ascontiguousarray(self.pixels, dtype=np.int64)
        if px.ndim != 2:
            raise ConfigError(f"quantized pixel grid must be 2-D, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ConfigError("image must be at least 1x1")
        if px.min() < 0 or px.max() >= self.levels:
            raise ConfigError(
                f"pixel levels must lie in [0, {self.levels}), "
                f"found range [{px.min()}, {px.max()}]"
            )
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class Kernel:
    """A fixed-size window copied out of a quantized image.

    ``origin`` is the (x, y) top-left corner in image coordinates; ``pixels``
    is a (h, w) value snapshot, never a view.
    """

    origin: tuple[int, int]
    pixels: np.ndarray
    levels: int
    id: str

    @property
    def size(self) -> tuple[int, int]:
        """(width, height) of the window."""
        return self.pixels.shape[1], self.pixels.shape[0]


def to_grayscale(img: RgbImage) -> GrayImage:
    """Collapse RGB to luma: round(0.299 r + 0.587 g + 0.114 b)."""
    rgb = img.pixels.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    luma = wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]
    gray = np.clip(np.rint(luma), 0, 255).astype(np.uint8)
    return GrayImage(gray)


def quantize(img: GrayImage, levels: int = DEFAULT_LEVELS) -> QuantizedImage:
    """Bin intensities into ``levels`` bins: level = floor(intensity * levels / 256)."""
    if not 2 <= levels <= 256:
        raise ConfigError(f"levels must be in [2, 256], got {levels}")
    lv = (img.pixels.astype(np.int64) * levels) // 256
    return QuantizedImage(lv, levels)


def tile_kernels(
    img: QuantizedImage,
    size: tuple[int, int],
    stride: tuple[int, int] | None = None,
) -> list[Kernel]:
    """Cut windows of ``size`` (w, h) at every stride multiple that fits.

    Origins are emitted in row-major order (top-to-bottom, left-to-right).
    ``stride`` defaults to ``size``, i.e. non-overlapping tiles.
    """
    w, h = size
    sx, sy = stride if stride is not None else size
    if sx < 1 or sy < 1:
        raise ConfigError(f"strides must be >= 1, got ({sx}, {sy})")
    if w < 1 or h < 1:
        raise ConfigError(f"kernel size must be >= 1x1, got {w}x{h}")
    if w > img.width or h > img.height:
        raise ConfigError(
            f"kernel {w}x{h} does not fit inside image {img.width}x{img.height}"
        )
    kernels = []
    for y in range(0, img.height - h + 1, sy):
        for x in range(0, img.width - w + 1, sx):
            patch = img.pixels[y : y + h, x : x + w].copy()
            kernels.append(Kernel((x, y), patch, img.levels, kernel_id(x, y, w, h)))
    return kernels


def kernel_grid_shape(
    image_size: tuple[int, int], size: tuple[int, int], stride: tuple[int, int]
) -> tuple[int, int]:
    """Closed-form (columns, rows) of the tiling lattice."""
    (iw, ih), (w, h), (sx, sy) = image_size, size, stride
    return (iw - w) // sx + 1, (ih - h) // sy + 1


# ---------------------------------------------------------------------------
# Raster I/O


def load_image(path) -> RgbImage:
    """Read a PNG or JPEG file as RGB."""
    with Image.open(path) as im:
        return RgbImage(np.asarray(im.convert("RGB")))


def gray_from_quantized(img: QuantizedImage) -> GrayImage:
    """Expand levels back to 8-bit intensities for display and storage."""
    scale = 255.0 / (img.levels - 1)
    return GrayImage(np.rint(img.pixels * scale).astype(np.uint8))


def save_png(img: RgbImage | GrayImage | QuantizedImage, path) -> None:
    """Write an image as PNG (quantized images are expanded to 8-bit gray)."""
    if isinstance(img, QuantizedImage):
        img = gray_from_quantized(img)
    mode = "RGB" if isinstance(img, RgbImage) else "L"
    Image.fromarray(img.pixels, mode=mode).save(path, format="PNG")


# ---------------------------------------------------------------------------
# Synthetic inscription generator
#
# Glyphs are connected stroke figures (thick line/arc skeletons) placed in
# disjoint boxes; noise is speckle -- small round blobs, structurally unlike
# strokes in radius and thickness -- confined to kernel-aligned patches so the
# ground truth can name every pure-noise kernel exactly.


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the synthetic inscription generator.

    Glyph boxes are aligned to the kernel lattice (``glyph_box`` should be a
    multiple of ``kernel_size``) so that every kernel either misses all
    glyphs, is a pure noise tile, or catches a substantial stroke chunk.
    """

    width: int = 400
    height: int = 240
    levels: int = DEFAULT_LEVELS
    glyph_count: int = 12
    glyph_box: tuple[int, int] = (40, 40)
    stroke_thickness: int = 4
    noise_density: float = 0.2
    blob_radius: int = 0
    blob_len: int = 2
    blobs_per_patch: int = 12
    kernel_size: tuple[int, int] = (20, 20)
    ink_level: int = 0
    background_level: int | None = None

    def __post_init__(self):
        if not 2 <= self.levels <= 256:
            raise ConfigError(f"levels must be in [2, 256], got {self.levels}")
        if not 0.0 <= self.noise_density <= 1.0:
            raise ConfigError(f"noise_density must be in [0, 1], got {self.noise_density}")
        if self.glyph_count < 0:
            raise ConfigError("glyph_count must be >= 0")
        bg = self.levels - 1 if self.background_level is None else self.background_level
        for name, level in (("ink_level", self.ink_level), ("background_level", bg)):
            if not 0 <= level < self.levels:
                raise ConfigError(f"{name} {level} outside [0, {self.levels})")

    @property
    def bg_level(self) -> int:
        return self.levels - 1 if self.background_level is None else self.background_level


@dataclass(frozen=True)
class SyntheticGroundTruth:
    """What the generator knows: pure-noise kernels and glyph bounding boxes."""

    noise_kernel_ids: frozenset[str]
    glyph_boxes: tuple[tuple[int, int, int, int], ...]  # (x, y, w, h)

    def to_json(self) -> str:
        payload = {
            "format": 1,
            "noise_kernel_ids": sorted(self.noise_kernel_ids),
            "glyph_boxes": [list(b) for b in self.glyph_boxes],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SyntheticGroundTruth":
        payload = json.loads(text)
        return cls(
            noise_kernel_ids=frozenset(payload["noise_kernel_ids"]),
            glyph_boxes=tuple(tuple(b) for b in payload["glyph_boxes"]),
        )


def _disk_offsets(radius: int) -> np.ndarray:
    r = max(0, int(radius))
    span = np.arange(-r, r + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    keep = dy * dy + dx * dx <= r * r
    return np.stack([dy[keep], dx[keep]], axis=1)


def _stamp(canvas: np.ndarray, cy: float, cx: float, offsets: np.ndarray, level: int) -> None:
    ys = np.rint(cy).astype(int) + offsets[:, 0]
    xs = np.rint(cx).astype(int) + offsets[:, 1]
    keep = (ys >= 0) & (ys < canvas.shape[0]) & (xs >= 0) & (xs < canvas.shape[1])
    canvas[ys[keep], xs[keep]] = level


def _stamp_path(canvas, points, offsets, level):
    # sample the polyline densely enough that consecutive stamps overlap
    for (y0, x0), (y1, x1) in zip(points[:-1], points[1:]):
        steps = max(1, int(math.hypot(y1 - y0, x1 - x0) * 2))
        for t in np.linspace(0.0, 1.0, steps + 1):
            _stamp(canvas, y0 + t * (y1 - y0), x0 + t * (x1 - x0), offsets, level)


def _glyph_skeleton(rng: np.random.Generator, w: int, h: int) -> list[list[tuple[float, float]]]:
    """Random stroke skeleton inside a w x h box, returned as polylines.

    The primary stroke spans the box through its center so every quadrant
    of the box receives ink, and every extra stroke starts on a point of an
    earlier stroke, so the rendered figure is a single connected component.
    """
    pad = max(3.0, 0.18 * min(w, h))
    lo_y, hi_y, lo_x, hi_x = pad, h - pad, pad, w - pad
    cy, cx = (lo_y + hi_y) / 2, (lo_x + hi_x) / 2

    def rand_point():
        return (rng.uniform(lo_y, hi_y), rng.uniform(lo_x, hi_x))

    def arc(radius, a0, a1, n=32):
        angles = np.linspace(a0, a1, n)
        return [
            (
                float(np.clip(cy + radius * np.sin(a), lo_y, hi_y)),
                float(np.clip(cx + radius * np.cos(a), lo_x, hi_x)),
            )
            for a in angles
        ]

    strokes: list[list[tuple[float, float]]] = []
    kind = int(rng.integers(0, 4))
    jit = lambda s: float(rng.uniform(-s, s))
    if kind == 0:  # cross: vertical bar plus a horizontal bar through it
        strokes.append([(lo_y, cx + jit(3)), (hi_y, cx + jit(3))])
        strokes.append([(cy + jit(3), lo_x), (cy + jit(3), hi_x)])
    elif kind == 1:  # near-closed ring passing through all quadrants
        r = 0.42 * min(hi_y - lo_y, hi_x - lo_x)
        a0 = rng.uniform(0, 2 * math.pi)
        strokes.append(arc(r, a0, a0 + rng.uniform(4.6, 6.0)))
    elif kind == 2:  # chevron spanning bottom corners with apex at the top
        apex = (lo_y + jit(2), cx + jit(3))
        strokes.append([(hi_y, lo_x), apex, (hi_y, hi_x)])
    else:  # X of two full diagonals
        strokes.append([(lo_y, lo_x), (hi_y, hi_x)])
        strokes.append([(lo_y, hi_x), (hi_y, lo_x)])

    for _ in range(int(rng.integers(1, 3))):
        base = strokes[int(rng.integers(0, len(strokes)))]
        anchor = base[int(rng.integers(0, len(base)))]
        strokes.append([anchor, rand_point()])
    return strokes


def _boxes_intersect(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def render_synthetic(cfg: SynthConfig, seed: int) -> tuple[QuantizedImage, SyntheticGroundTruth]:
    """Render a deterministic inscription-like test image plus its ground truth.

    The same (cfg, seed) pair always produces bit-identical output. Noise is
    painted only inside whole kernel tiles that touch no glyph box, so
    ``noise_kernel_ids`` is exact and disjoint from ``glyph_boxes``.
    """
    rng = np.random.default_rng(seed)
    canvas = np.full((cfg.height, cfg.width), cfg.bg_level, dtype=np.int64)

    # glyph boxes on a shuffled grid of disjoint cells aligned to the kernel
    # lattice; the in-box padding of the skeletons keeps glyphs separated
    bw, bh = cfg.glyph_box
    cols = cfg.width // bw
    rows = cfg.height // bh
    if cols * rows < cfg.glyph_count:
        raise ConfigError(
            f"canvas {cfg.width}x{cfg.height} fits only {cols * rows} glyph boxes "
            f"of {bw}x{bh}, requested {cfg.glyph_count}"
        )
    cells = [(c, r) for r in range(rows) for c in range(cols)]
    picked = rng.permutation(len(cells))[: cfg.glyph_count]
    stroke = _disk_offsets(max(1, cfg.stroke_thickness // 2))
    glyph_boxes = []
    for idx in sorted(picked):
        c, r = cells[idx]
        x, y = c * bw, r * bh
        glyph_boxes.append((x, y, bw, bh))
        for poly in _glyph_skeleton(rng, bw, bh):
            shifted = [(y + py, x + px) for py, px in poly]
            _stamp_path(canvas, shifted, stroke, cfg.ink_level)

    # noise patches: whole kernel tiles away from every glyph box
    kw, kh = cfg.kernel_size
    noise_ids: set[str] = set()
    if cfg.noise_density > 0:
        free = []
        for ty in range(0, cfg.height - kh + 1, kh):
            for tx in range(0, cfg.width - kw + 1, kw):
                tile_box = (tx, ty, kw, kh)
                if not any(_boxes_intersect(tile_box, gb) for gb in glyph_boxes):
                    free.append((tx, ty))
        n_noise = int(round(cfg.noise_density * len(free)))
        chosen = rng.permutation(len(free))[:n_noise]
        blob = _disk_offsets(cfg.blob_radius)
        # speckle = short dash of blob_len stamps, horizontal or vertical;
        # reach keeps every stamp inside the tile
        reach = cfg.blob_radius + cfg.blob_len - 1
        for idx in sorted(chosen):
            tx, ty = free[idx]
            for _ in range(cfg.blobs_per_patch):
                cy = ty + rng.uniform(reach, kh - 1 - reach)
                cx = tx + rng.uniform(reach, kw - 1 - reach)
                horizontal = bool(rng.integers(0, 2))
                for step in range(cfg.blob_len):
                    if horizontal:
                        _stamp(canvas, cy, cx + step, blob, cfg.ink_level)
                    else:
                        _stamp(canvas, cy + step, cx, blob, cfg.ink_level)
            noise_ids.add(kernel_id(tx, ty, kw, kh))

    img = QuantizedImage(canvas, cfg.levels)
    truth = SyntheticGroundTruth(frozenset(noise_ids), tuple(glyph_boxes))
    return img, truth
