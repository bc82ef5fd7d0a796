"""Uniform vertex-centered grids on the unit square and the difference operators on them.

Nodes sit at (i*hx, j*hy) with i = 0..nx-1, j = 0..ny-1.  Flat storage is
row-major with x fastest: node (i, j) lives at flat index j*nx + i, so a
``values.reshape(ny, nx)`` view indexes as [j, i].
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline


class BoundaryTag(enum.IntEnum):
    """Node classification.  Corners count as Dirichlet (bottom/top win)."""

    INTERIOR = 0
    BOTTOM = 1  # y = 0, Dirichlet
    RIGHT = 2   # x = 1, Neumann (outward normal +x)
    TOP = 3     # y = 1, Dirichlet
    LEFT = 4    # x = 0, Neumann (outward normal -x)


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid with nx*ny vertex-centered nodes on [0, 1]^2."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs at least 3 nodes per direction, got {self.nx}x{self.ny}")

    @property
    def hx(self) -> float:
        return 1.0 / (self.nx - 1)

    @property
    def hy(self) -> float:
        return 1.0 / (self.ny - 1)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        """Node abscissae, shape (nx,)."""
        return np.linspace(0.0, 1.0, self.nx)

    @property
    def y(self) -> np.ndarray:
        """Node ordinates, shape (ny,)."""
        return np.linspace(0.0, 1.0, self.ny)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays X, Y of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y)

    def flat_index(self, i, j):
        return np.asarray(j) * self.nx + np.asarray(i)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into nt steps of size tau = T/nt."""

    T: float
    nt: int

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if self.nt < 1:
            raise ValueError(f"need at least one time step, got nt={self.nt}")

    @property
    def tau(self) -> float:
        return self.T / self.nt

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt + 1)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Nodal values on a Grid2D, stored flat (x fastest)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape == (self.grid.ny, self.grid.nx):
            v = v.ravel()
        if v.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"field has {v.size} values for a {self.grid.nx}x{self.grid.ny} grid"
            )
        object.__setattr__(self, "values", v)

    @property
    def values2d(self) -> np.ndarray:
        """View of shape (ny, nx), indexed [j, i]."""
        return self.values.reshape(self.grid.ny, self.grid.nx)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def field_from_function(grid: Grid2D, fn) -> ScalarField:
    """Evaluate a vectorized callable fn(x, y) at the grid nodes."""
    X, Y = grid.meshes()
    vals = np.broadcast_to(np.asarray(fn(X, Y), dtype=float), X.shape)
    return ScalarField(grid, vals.copy())


def boundary_tags(grid: Grid2D) -> np.ndarray:
    """Per-node BoundaryTag values, flat array of ints."""
    tags = np.full((grid.ny, grid.nx), int(BoundaryTag.INTERIOR))
    tags[:, 0] = BoundaryTag.LEFT
    tags[:, -1] = BoundaryTag.RIGHT
    tags[0, :] = BoundaryTag.BOTTOM   # Dirichlet rows override the corners
    tags[-1, :] = BoundaryTag.TOP
    return tags.ravel()


def apply_laplacian(field: ScalarField) -> ScalarField:
    """Five-point discrete Laplacian.

    Interior nodes use the centered second difference in each direction.
    Where a neighbor is missing the same three-node second difference is
    taken one-sided, which keeps the operator exact on per-direction
    quadratics at every node.
    """
    g = field.grid
    v = field.values2d
    dxx = np.empty_like(v)
    dxx[:, 1:-1] = v[:, :-2] - 2.0 * v[:, 1:-1] + v[:, 2:]
    dxx[:, 0] = v[:, 0] - 2.0 * v[:, 1] + v[:, 2]
    dxx[:, -1] = v[:, -1] - 2.0 * v[:, -2] + v[:, -3]
    dxx /= g.hx ** 2
    dyy = np.empty_like(v)
    dyy[1:-1, :] = v[:-2, :] - 2.0 * v[1:-1, :] + v[2:, :]
    dyy[0, :] = v[0, :] - 2.0 * v[1, :] + v[2, :]
    dyy[-1, :] = v[-1, :] - 2.0 * v[-2, :] + v[-3, :]
    dyy /= g.hy ** 2
    return ScalarField(g, dxx + dyy)


def apply_dx(field: ScalarField) -> ScalarField:
    """First x-derivative: centered inside, second-order one-sided at x = 0 and x = 1."""
    g = field.grid
    v = field.values2d
    d = np.empty_like(v)
    d[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * g.hx)
    d[:, 0] = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * g.hx)
    d[:, -1] = (3.0 * v[:, -1] - 4.0 * v[:, -2] + v[:, -3]) / (2.0 * g.hx)
    return ScalarField(g, d)


def norm_l2(field: ScalarField) -> float:
    """Grid-weighted l2 norm sqrt(hx*hy*sum v^2)."""
    g = field.grid
    return float(np.sqrt(g.hx * g.hy * np.sum(field.values ** 2)))


def norm_linf(field: ScalarField) -> float:
    return float(np.max(np.abs(field.values)))


def _line_weights(coords: np.ndarray, h: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Lower cell index and fractional offset for 1D linear interpolation.
    idx = np.clip(np.floor(coords / h).astype(int), 0, n - 2)
    t = coords / h - idx
    return idx, t


def sample_bilinear(field: ScalarField, target: Grid2D) -> ScalarField:
    """Bilinear interpolation of a field at the nodes of another grid."""
    src = field.grid
    v = field.values2d
    ix, tx = _line_weights(target.x, src.hx, src.nx)
    iy, ty = _line_weights(target.y, src.hy, src.ny)
    v00 = v[np.ix_(iy, ix)]
    v01 = v[np.ix_(iy, ix + 1)]
    v10 = v[np.ix_(iy + 1, ix)]
    v11 = v[np.ix_(iy + 1, ix + 1)]
    wx = tx[None, :]
    wy = ty[:, None]
    out = (
        (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01)
        + wy * ((1.0 - wx) * v10 + wx * v11)
    )
    return ScalarField(target, out)


def restrict(field: ScalarField, coarse: Grid2D) -> ScalarField:
    """Restrict a field to a coarser grid by sampling a smooth spline interpolant.

    The target grid is generally not nested in the source grid, so each
    coarse node lands at a different phase inside its source cell.  A C0
    interpolant (bilinear) then leaves cell-phase kinks that second
    differences on the coarse grid amplify by 1/h^2 into grid-frequency
    noise; sampling a C2 bicubic surface instead keeps the restricted
    field cleanly differentiable.  Exact on polynomials up to cubics per
    direction, so in particular on bilinear fields.
    """
    src = field.grid
    if coarse.nx > src.nx or coarse.ny > src.ny:
        raise ValueError(
            f"cannot restrict a {src.nx}x{src.ny} field to the finer grid {coarse.nx}x{coarse.ny}"
        )
    spline = RectBivariateSpline(
        src.y, src.x, field.values2d, kx=min(3, src.ny - 1), ky=min(3, src.nx - 1), s=0
    )
    return ScalarField(coarse, spline(coarse.y, coarse.x))


def sample_nearest(field: ScalarField, target: Grid2D) -> ScalarField:
    """Nearest-node sampling; keeps discrete value sets (e.g. 0/1 masks) intact."""
    src = field.grid
    v = field.values2d
    ix = np.clip(np.rint(target.x / src.hx).astype(int), 0, src.nx - 1)
    iy = np.clip(np.rint(target.y / src.hy).astype(int), 0, src.ny - 1)
    return ScalarField(target, v[np.ix_(iy, ix)])


# ---------------------------------------------------------------------------
# serialization

_FIELD_HEADER = "nx,ny"
_FIELD_COLUMNS = "i,j,x,y,value"


def write_field_csv(field: ScalarField, path) -> None:
    """Write a field as CSV: dims header block, then one i,j,x,y,value line per node."""
    g = field.grid
    x = g.x
    y = g.y
    v = field.values2d
    lines = [_FIELD_HEADER, f"{g.nx},{g.ny}", _FIELD_COLUMNS]
    for j in range(g.ny):
        yj = float(y[j])
        row = v[j]
        for i in range(g.nx):
            lines.append(f"{i},{j},{float(x[i])!r},{yj!r},{float(row[i])!r}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path) -> ScalarField:
    """Read a field written by write_field_csv."""
    with open(path, "r", encoding="ascii") as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if len(raw) < 3 or raw[0] != _FIELD_HEADER or raw[2] != _FIELD_COLUMNS:
        raise ValueError(f"{path}: not a field CSV (bad header block)")
    try:
        nx, ny = (int(tok) for tok in raw[1].split(","))
    except ValueError as exc:
        raise ValueError(f"{path}: bad grid dimensions line {raw[1]!r}") from exc
    grid = Grid2D(nx, ny)
    body = raw[3:]
    if len(body) != grid.n_nodes:
        raise ValueError(f"{path}: expected {grid.n_nodes} data lines, found {len(body)}")
    vals = np.full((ny, nx), np.nan)
    for ln in body:
        toks = ln.split(",")
        if len(toks) != 5:
            raise ValueError(f"{path}: malformed data line {ln!r}")
        i, j = int(toks[0]), int(toks[1])
        if not (0 <= i < nx and 0 <= j < ny):
            raise ValueError(f"{path}: node ({i},{j}) outside {nx}x{ny} grid")
        vals[j, i] = float(toks[4])
    if np.isnan(vals).any():
        raise ValueError(f"{path}: duplicate or missing node lines")
    return ScalarField(grid, vals)


def write_mask(mask: ScalarField, path) -> None:
    """Write a 0/1 field as a whitespace matrix; first file row is the top edge (y = 1)."""
    m = np.rint(mask.values2d).astype(int)
    if not np.isin(m, (0, 1)).all():
        raise ValueError("mask values must be 0 or 1")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in m[::-1]:
            fh.write(" ".join(str(c) for c in row) + "\n")


def read_mask(path) -> ScalarField:
    """Read a whitespace 0/1 matrix into a field (first file row = top edge)."""
    with open(path, "r", encoding="ascii") as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty mask file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged mask rows")
    try:
        m = np.array([[int(tok) for tok in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: mask entries must be integers") from exc
    if not np.isin(m, (0, 1)).all():
        raise ValueError(f"{path}: mask entries must be 0 or 1")
    grid = Grid2D(width, len(rows))
    return ScalarField(grid, m[::-1].astype(float))
