"""Area-preserving tile grid selection and per-image token accounting.

An input image of W x H pixels is resized onto a cols x rows canvas of
fixed-size square tiles. The grid is chosen to keep as much of the original
area as possible (capped by a threshold) while staying close to the original
aspect ratio; the two factors multiply into the selection score. Grid choice
drives the token cost of the image: one token block per tile, plus one
thumbnail block when the grid has more than one tile.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .manifest import ImageDims

TILE_TOKENS_DEFAULT = 256


@dataclass(frozen=True)
class TilingConfig:
    tile_size_px: int = 448
    max_tiles: int = 12
    area_threshold: float = 0.6
    tile_tokens: int = TILE_TOKENS_DEFAULT

    def __post_init__(self):
        if self.tile_size_px < 1 or self.max_tiles < 1 or self.tile_tokens < 1:
            raise ValueError("tile_size_px, max_tiles and tile_tokens must be positive")
        if not 0 < self.area_threshold <= 1:
            raise ValueError("area_threshold must be in (0, 1]")


@dataclass(frozen=True)
class TileGrid:
    cols: int
    rows: int

    def __post_init__(self):
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid dims must be positive")

    @property
    def tiles(self) -> int:
        return self.cols * self.rows


@dataclass(frozen=True)
class TileLayout:
    canvas_w: int
    canvas_h: int
    rects: tuple[tuple[int, int, int, int], ...]


def candidate_grids(max_tiles: int) -> list[TileGrid]:
    """All cols x rows grids with cols*rows <= max_tiles, lexicographic order."""
    if max_tiles < 1:
        raise ValueError("max_tiles must be >= 1")
    return [
        TileGrid(cols, rows)
        for cols in range(1, max_tiles + 1)
        for rows in range(1, max_tiles // cols + 1)
    ]


def score_grid(grid: TileGrid, dims: ImageDims, cfg: TilingConfig = TilingConfig()) -> float:
    """Selection score: min(area ratio, threshold) * aspect alignment, in [0, threshold]."""
    area_ratio = grid.tiles * cfg.tile_size_px**2 / (dims.width_px * dims.height_px)
    grid_aspect = grid.cols / grid.rows
    orig_aspect = dims.width_px / dims.height_px
    return min(area_ratio, cfg.area_threshold) * min(grid_aspect / orig_aspect, orig_aspect / grid_aspect)


def _score_ratio(grid: TileGrid, dims: ImageDims, cfg: TilingConfig) -> tuple[int, int]:
    # Exact rational score as an (unreduced) numerator/denominator pair.
    thr = Fraction(cfg.area_threshold)
    area = dims.width_px * dims.height_px
    area_num = min(grid.tiles * cfg.tile_size_px**2 * thr.denominator, thr.numerator * area)
    area_den = thr.denominator * area
    ch = grid.cols * dims.height_px
    rw = grid.rows * dims.width_px
    return area_num * min(ch, rw), area_den * max(ch, rw)


def select_grid(dims: ImageDims, cfg: TilingConfig = TilingConfig(), tile_cap: int | None = None) -> TileGrid:
    """Pick the best grid among candidates with at most tile_cap tiles.

    Maximizes the selection score with exact integer arithmetic (no float
    ties). Ties break toward fewest tiles, then smallest aspect-ratio
    distance to the original, then smallest column count.
    """
    if tile_cap is None:
        tile_cap = cfg.max_tiles
    if not 1 <= tile_cap <= cfg.max_tiles:
        raise ValueError(f"tile_cap must be in [1, {cfg.max_tiles}], got {tile_cap}")

    best: TileGrid | None = None
    best_num = best_den = 0
    best_diff = 0
    for grid in candidate_grids(tile_cap):
        num, den = _score_ratio(grid, dims, cfg)
        # |cols/rows - W/H| up to the common 1/H factor: |cols*H - rows*W| / rows
        diff = abs(grid.cols * dims.height_px - grid.rows * dims.width_px)
        if best is None:
            better = True
        else:
            lhs, rhs = num * best_den, best_num * den
            if lhs != rhs:
                better = lhs > rhs
            elif grid.tiles != best.tiles:
                better = grid.tiles < best.tiles
            elif diff * best.rows != best_diff * grid.rows:
                better = diff * best.rows < best_diff * grid.rows
            else:
                better = grid.cols < best.cols
        if better:
            best, best_num, best_den, best_diff = grid, num, den, diff
    assert best is not None
    return best


def grid_tokens(grid: TileGrid, cfg: TilingConfig = TilingConfig()) -> int:
    """Token cost of a chosen grid: k tiles plus a thumbnail tile when k > 1."""
    k = grid.tiles
    return cfg.tile_tokens if k == 1 else (k + 1) * cfg.tile_tokens


def image_tokens(dims: ImageDims, tile_cap: int, cfg: TilingConfig = TilingConfig()) -> int:
    """Token cost of an image tiled under the given per-image tile cap."""
    return grid_tokens(select_grid(dims, cfg, tile_cap), cfg)


def tile_layout(dims: ImageDims, grid: TileGrid, cfg: TilingConfig = TilingConfig()) -> TileLayout:
    """Row-major crop boxes on the resize canvas; the caller resizes dims to the canvas."""
    s = cfg.tile_size_px
    rects = tuple(
        (c * s, r * s, (c + 1) * s, (r + 1) * s)
        for r in range(grid.rows)
        for c in range(grid.cols)
    )
    return TileLayout(canvas_w=grid.cols * s, canvas_h=grid.rows * s, rects=rects)
