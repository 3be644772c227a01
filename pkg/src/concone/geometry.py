"""Base domains, structured grids and metric-aware discrete operators.

Supported domain kinds:

  * interval(lo, hi)            -- 1D segment, flat metric
  * rectangle(a, b)             -- [0,a] x [0,b], flat metric (n = 2)
  * flat_disk(R, n)             -- radially symmetric fields on a Euclidean
                                   ball, reduced to a 1D grid in rho on [0,R]
  * spherical_cap(rho0, n)      -- geodesic ball on the round sphere S^n,
                                   reduced to a 1D grid in rho on [0,rho0]

Radial grids carry the metric weight sqrt(det sigma): rho^(n-1) on the
flat disk and sin(rho)^(n-1) on the cap; the angular sphere factor
|S^(n-1)| is applied only where full-domain volumes are needed.  The pole
rho = 0 is a symmetry node: gradients vanish there, and the divergence is
evaluated through its removable-singularity limit n * X'(0).

Discrete operators are second-order central differences in the interior
with one-sided second-order stencils at boundary nodes; boundary values
are flagged lower-accuracy by convention.  Grids are immutable after
construction and fields are value-semantic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Domain", "Grid", "ScalarField", "BoundaryCurvature", "GridMismatchError",
    "interval", "rectangle", "flat_disk", "spherical_cap",
    "build_grid", "gradient", "divergence", "boundary_mean_curvature",
    "sphere_area",
]


class GridMismatchError(ValueError):
    pass


def sphere_area(k):
    """Surface measure of the unit sphere S^k (k = 0 gives 2 points)."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class Domain:
    """Base manifold Omega with its metric data and declared hypotheses.

    ncm_declared records the no-closed-minimal-hypersurface hypothesis; it
    has no finite verification procedure, so constructors set it from the
    known cases (bounded Euclidean domains: true; caps strictly inside the
    open hemisphere: true; caps at or beyond the equator: forced false).
    """

    kind: str
    params: tuple
    n: int
    ncm_declared: bool
    mean_convex_declared: bool

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == "spherical_cap":
            rho0 = self.params[0]
            if not 0.0 < rho0 < math.pi:
                raise ValueError("cap geodesic radius must lie in (0, pi)")
            if rho0 >= math.pi / 2 and self.ncm_declared:
                raise ValueError("caps at or beyond the equator must declare ncm = False")
        if self.mean_convex_declared:
            bc = boundary_mean_curvature(self)
            if min(bc.values.values()) < 0.0:
                raise ValueError("mean_convex_declared requires boundary mean curvature >= 0")

    @property
    def radial(self):
        return self.kind in ("flat_disk", "spherical_cap")


def interval(lo, hi, ncm=True, mean_convex=True):
    if not lo < hi:
        raise ValueError("need lo < hi")
    return Domain("interval", (float(lo), float(hi)), 1, ncm, mean_convex)


def rectangle(a, b, ncm=True, mean_convex=True):
    if a <= 0 or b <= 0:
        raise ValueError("rectangle sides must be positive")
    return Domain("rectangle", (float(a), float(b)), 2, ncm, mean_convex)


def flat_disk(radius, n=2, ncm=True, mean_convex=True):
    if radius <= 0:
        raise ValueError("disk radius must be positive")
    return Domain("flat_disk", (float(radius),), n, ncm, mean_convex)


def spherical_cap(rho0, n=2, ncm=None, mean_convex=None):
    inside_hemisphere = rho0 < math.pi / 2
    if ncm is None:
        ncm = inside_hemisphere
    if mean_convex is None:
        mean_convex = rho0 <= math.pi / 2
    return Domain("spherical_cap", (float(rho0),), n, ncm, mean_convex)


@dataclass(frozen=True)
class Grid:
    """Structured grid over the closure of a Domain.

    1D kinds store `x` (nodes), `h`; the rectangle stores axis arrays and a
    row-major node layout of shape (nx, ny) flattened C-style.  `weight`
    holds sqrt(det sigma) at the nodes and `weight_mid` at cell midpoints
    (1D kinds only).  `boundary` is exactly the topological boundary of
    the node set; `interior` is its complement.
    """

    domain: Domain
    shape: tuple
    x: np.ndarray          # 1D node coordinates, or None for rectangle
    y: np.ndarray | None
    h: tuple
    interior: np.ndarray   # flat indices
    boundary: np.ndarray   # flat indices
    weight: np.ndarray     # sqrt(det sigma) at nodes (1.0 on flat kinds)
    weight_mid: np.ndarray | None
    has_pole: bool

    @property
    def size(self):
        return int(np.prod(self.shape))

    def coords(self):
        """Node coordinate columns, dict name -> array (flat order)."""
        if self.domain.kind == "rectangle":
            X, Y = np.meshgrid(self.x, self.y, indexing="ij")
            return {"x": X.ravel(), "y": Y.ravel()}
        name = "rho" if self.domain.radial else "x"
        return {name: self.x.copy()}

    def node_boundary_distance(self):
        """Distance from each node to the domain boundary."""
        d = self.domain
        if d.kind == "interval":
            lo, hi = d.params
            return np.minimum(self.x - lo, hi - self.x)
        if d.radial:
            return d.params[0] - self.x
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        a, b = d.params
        return np.minimum.reduce([X, a - X, Y, b - Y]).ravel()


def _radial_weight(domain, rho):
    n = domain.n
    if domain.kind == "flat_disk":
        return rho ** (n - 1) if n > 1 else np.ones_like(rho)
    return np.sin(rho) ** (n - 1) if n > 1 else np.ones_like(rho)


def build_grid(d, resolution):
    """Build the structured grid covering the closure of the domain.

    resolution counts nodes per axis and must be >= 3.
    """
    if resolution < 3:
        raise ValueError("resolution must be >= 3")
    if d.kind == "interval":
        lo, hi = d.params
        x = np.linspace(lo, hi, resolution)
        h = (hi - lo) / (resolution - 1)
        idx = np.arange(resolution)
        return Grid(d, (resolution,), x, None, (h,), idx[1:-1], np.array([0, resolution - 1]),
                    np.ones(resolution), np.ones(resolution - 1), False)
    if d.radial:
        R = d.params[0]
        x = np.linspace(0.0, R, resolution)
        h = R / (resolution - 1)
        idx = np.arange(resolution)
        w = _radial_weight(d, x)
        wm = _radial_weight(d, 0.5 * (x[:-1] + x[1:]))
        return Grid(d, (resolution,), x, None, (h,), idx[:-1], np.array([resolution - 1]),
                    w, wm, True)
    if d.kind == "rectangle":
        a, b = d.params
        nx = ny = resolution
        x = np.linspace(0.0, a, nx)
        y = np.linspace(0.0, b, ny)
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        on_edge = (ii == 0) | (ii == nx - 1) | (jj == 0) | (jj == ny - 1)
        flat = np.arange(nx * ny)
        return Grid(d, (nx, ny), x, y, (a / (nx - 1), b / (ny - 1)),
                    flat[~on_edge.ravel()], flat[on_edge.ravel()],
                    np.ones(nx * ny), None, False)
    raise ValueError(f"unsupported domain kind '{d.kind}'")


@dataclass
class ScalarField:
    """Nodal values of a scalar quantity on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size != self.grid.size:
            raise GridMismatchError("field length does not match grid node count")
        self.values = self.values.reshape(-1)

    def copy(self):
        return ScalarField(self.grid, self.values.copy())


def _same_grid(a, b):
    if a.grid is not b.grid and (a.grid.shape != b.grid.shape or a.grid.domain != b.grid.domain):
        raise GridMismatchError("fields live on different grids")


def _d1(vals, h):
    """Second-order first derivative of a 1D array, one-sided at the ends."""
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2 * h)
    out[0] = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
    out[-1] = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * h)
    return out


def gradient(u):
    """Discrete gradient; shape (axes, nodes).

    Radial grids return the single rho-component, exactly zero at the pole
    by symmetry.
    """
    g = u.grid
    v = u.values
    if g.domain.kind == "rectangle":
        nx, ny = g.shape
        V = v.reshape(nx, ny)
        gx = np.empty_like(V)
        gy = np.empty_like(V)
        hx, hy = g.h
        gx[1:-1, :] = (V[2:, :] - V[:-2, :]) / (2 * hx)
        gx[0, :] = (-3 * V[0, :] + 4 * V[1, :] - V[2, :]) / (2 * hx)
        gx[-1, :] = (3 * V[-1, :] - 4 * V[-2, :] + V[-3, :]) / (2 * hx)
        gy[:, 1:-1] = (V[:, 2:] - V[:, :-2]) / (2 * hy)
        gy[:, 0] = (-3 * V[:, 0] + 4 * V[:, 1] - V[:, 2]) / (2 * hy)
        gy[:, -1] = (3 * V[:, -1] - 4 * V[:, -2] + V[:, -3]) / (2 * hy)
        return np.stack([gx.ravel(), gy.ravel()])
    out = _d1(v, g.h[0])
    if g.has_pole:
        out[0] = 0.0
    return out[None, :]


def divergence(X, grid):
    """Metric-aware discrete divergence: (1/w) d_i(w X^i).

    X has shape (axes, nodes) on the given grid.  At a radial pole the
    singular (n-1)/rho (resp. (n-1)cot rho) channel is replaced by its
    limit, giving div X = n * X'(0) with X'(0) = X[h]/h by symmetry.
    """
    X = np.asarray(X, dtype=float)
    g = grid
    if X.ndim != 2 or X.shape[1] != g.size:
        raise GridMismatchError("vector field does not match grid")
    if g.domain.kind == "rectangle":
        nx, ny = g.shape
        return (_dx_rect(X[0].reshape(nx, ny), g.h[0], 0)
                + _dx_rect(X[1].reshape(nx, ny), g.h[1], 1)).ravel()
    h = g.h[0]
    if not g.domain.radial:
        return _d1(X[0], h)
    w = g.weight
    out = np.empty(g.size)
    wx = w * X[0]
    out[1:-1] = (wx[2:] - wx[:-2]) / (2 * h) / w[1:-1]
    out[-1] = (3 * wx[-1] - 4 * wx[-2] + wx[-3]) / (2 * h) / w[-1]
    # pole: div X -> n X'(0); X is odd in rho so X'(0) = X[1]/h to O(h^2)
    out[0] = g.domain.n * X[0][1] / h
    return out


def _dx_rect(V, h, axis):
    out = np.empty_like(V)
    if axis == 1:
        V = V.T
        out = out.T
    out[1:-1, :] = (V[2:, :] - V[:-2, :]) / (2 * h)
    out[0, :] = (-3 * V[0, :] + 4 * V[1, :] - V[2, :]) / (2 * h)
    out[-1, :] = (3 * V[-1, :] - 4 * V[-2, :] + V[-3, :]) / (2 * h)
    return out if axis == 0 else out.T


@dataclass(frozen=True)
class BoundaryCurvature:
    """Mean curvature of the boundary pieces, outward normal, unit 1/length."""

    values: dict
    note: str = ""


def boundary_mean_curvature(d):
    """Boundary mean curvature per C^2 piece (outward normal convention)."""
    n = d.n
    if d.kind == "flat_disk":
        return BoundaryCurvature({"rim": (n - 1) / d.params[0]})
    if d.kind == "spherical_cap":
        return BoundaryCurvature({"rim": (n - 1) / math.tan(d.params[0])})
    if d.kind == "rectangle":
        return BoundaryCurvature({f: 0.0 for f in ("left", "right", "bottom", "top")},
                                 note="corners excluded: not C^2, discretization artifact")
    return BoundaryCurvature({"endpoints": 0.0},
                             note="0-dimensional boundary: curvature not applicable")
