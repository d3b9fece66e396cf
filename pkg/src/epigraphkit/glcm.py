"""Gray-level co-occurrence matrices over the four canonical directions.

Co-occurrence is counted at unit pixel distance. Symmetric accumulation
(each pair counted in both orders) is the default, which makes the
normalized matrix exactly symmetric and its two marginals identical.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyGlcmError
from .imaging import Kernel

_CANONICAL = {(0, 1), (-1, 1), (-1, 0), (-1, -1)}


@dataclass(frozen=True)
class Offset:
    """Unit displacement (dy, dx); one of the four Haralick directions."""

    dy: int
    dx: int

    def __post_init__(self):
        if (self.dy, self.dx) not in _CANONICAL:
            raise ConfigError(
                f"offset ({self.dy}, {self.dx}) is not one of the four "
                f"canonical unit directions {sorted(_CANONICAL)}"
            )


OFFSET_0 = Offset(0, 1)
OFFSET_45 = Offset(-1, 1)
OFFSET_90 = Offset(-1, 0)
OFFSET_135 = Offset(-1, -1)
CANONICAL_OFFSETS = (OFFSET_0, OFFSET_45, OFFSET_90, OFFSET_135)


@dataclass(frozen=True, eq=False)
class Glcm:
    """Normalized co-occurrence matrix with its marginals.

    ``p`` sums to 1; ``px``/``py`` are the row/column marginals;
    ``pair_count`` is the raw count total before normalization.
    """

    levels: int
    p: np.ndarray
    px: np.ndarray
    py: np.ndarray
    pair_count: int


def cooccurrence(k: Kernel, off: Offset, symmetric: bool = True) -> np.ndarray:
    """Count level pairs (a, a + off) for every pixel a inside the kernel.

    Returns an L x L integer matrix. With ``symmetric`` the reversed pair is
    accumulated as well, doubling the total. A kernel too small to contain
    any pair for this offset yields an all-zero matrix.
    """
    levels = k.levels
    grid = k.pixels
    h, w = grid.shape
    y0, y1 = max(0, -off.dy), h - max(0, off.dy)
    x0, x1 = max(0, -off.dx), w - max(0, off.dx)
    counts = np.zeros((levels, levels), dtype=np.int64)
    if y1 > y0 and x1 > x0:
        i = grid[y0:y1, x0:x1].ravel()
        j = grid[y0 + off.dy : y1 + off.dy, x0 + off.dx : x1 + off.dx].ravel()
        counts = np.bincount(i * levels + j, minlength=levels * levels).reshape(
            levels, levels
        )
    if symmetric:
        counts = counts + counts.T
    return counts


def normalize_glcm(counts: np.ndarray) -> Glcm:
    """Turn raw counts into probabilities with marginals attached."""
    counts = np.asarray(counts)
    total = int(counts.sum())
    if total == 0:
        raise EmptyGlcmError(
            "co-occurrence counts are all zero; the offset does not fit the kernel"
        )
    p = counts.astype(np.float64) / total
    return Glcm(
        levels=counts.shape[0],
        p=p,
        px=p.sum(axis=1),
        py=p.sum(axis=0),
        pair_count=total,
    )


def glcm_from_kernel(k: Kernel, off: Offset, symmetric: bool = True) -> Glcm:
    return normalize_glcm(cooccurrence(k, off, symmetric=symmetric))


def four_direction_glcms(k: Kernel, symmetric: bool = True) -> list[Glcm]:
    """One normalized GLCM per canonical direction (0, 45, 90, 135 degrees)."""
    return [glcm_from_kernel(k, off, symmetric=symmetric) for off in CANONICAL_OFFSETS]


def glcm_to_csv(g: Glcm) -> str:
    """Debug dump: header row, then the probability matrix row-major."""
    buf = io.StringIO()
    buf.write("levels,pair_count\n")
    buf.write(f"{g.levels},{g.pair_count}\n")
    for row in g.p:
        buf.write(",".join(format(v, ".17g") for v in row) + "\n")
    return buf.getvalue()


def glcm_from_csv(text: str) -> Glcm:
    """Parse the :func:`glcm_to_csv` format back into a Glcm."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if len(lines) < 2 or lines[0] != "levels,pair_count":
        raise ConfigError("not a GLCM csv: missing 'levels,pair_count' header")
    levels, pair_count = (int(v) for v in lines[1].split(","))
    p = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    if p.shape != (levels, levels):
        raise ConfigError(f"GLCM csv body {p.shape} does not match levels {levels}")
    return Glcm(levels=levels, p=p, px=p.sum(axis=1), py=p.sum(axis=0), pair_count=pair_count)
