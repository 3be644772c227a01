"""Mean curvature evaluations for graphs, slices and the model foliation.

The mean curvature of the graph of u in the conformal cone is

    H = (1/phi(u)) * ( -div(Du/w) + n phi'(u) / (phi(u) w) ),

taken with respect to the upward normal (positive d_r component).  Two
discrete evaluation routes are provided:

  * "composite": the geometry module's nodal gradient followed by its
    metric-aware divergence.  This is independent of the solver's stencil,
    so on a converged solve it measures genuine discretization error and
    shrinks at second order under refinement.
  * "compact": the solver-consistent cell assembly, rescaled to curvature
    units.  On a converged solve this is the equation residual divided by
    phi(u), i.e. machine-small; it is the right certificate for the slab
    report's lower graph.

Boundary nodes always use one-sided composite stencils and are flagged
lower-accuracy.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import ScalarField

__all__ = [
    "CurvatureField", "SlabReport", "graph_mean_curvature",
    "conformal_mean_curvature", "slab_boundary_report",
    "foliation_mean_curvature",
]


@dataclass
class CurvatureField:
    """Nodal mean curvature values (unit 1/length in the cone metric)."""

    field: ScalarField
    convention: str                 # "upward-graph" or "outward-domain"
    boundary_flagged: np.ndarray    # indices with lower-accuracy one-sided stencils

    def flipped(self):
        tag = "outward-domain" if self.convention == "upward-graph" else "upward-graph"
        return CurvatureField(ScalarField(self.field.grid, -self.field.values),
                              tag, self.boundary_flagged)

    def interior_values(self):
        return self.field.values[self.field.grid.interior]


def _nodal_curvature_composite(grid, profile, u):
    n = grid.domain.n
    gv = geo.gradient(ScalarField(grid, u))
    w = np.sqrt(1.0 + np.sum(gv * gv, axis=0))
    div = geo.divergence(gv / w, grid)
    phi = profile.phi(u)
    dphi = profile.dphi(u)
    return (-div + n * dphi / (phi * w)) / phi


def _nodal_curvature_compact(grid, profile, u):
    """Cell-assembly curvature: -(PDE residual)/phi at interior nodes.

    Independent re-derivation of the solver's Euler-Lagrange cells; kept
    separate so residual/curvature cross-checks compare two code paths.
    """
    n = grid.domain.n
    g = lambda r: profile.phin(r, n)
    dg = lambda r: profile.dphin(r, n)
    if grid.domain.kind == "rectangle":
        eprime, vnode = _eprime_2d(grid, g, dg, u)
    else:
        eprime, vnode = _eprime_1d(grid, g, dg, u)
    H = eprime / (g(u) * vnode * profile.phi(u))
    if grid.has_pole:
        # removable-singularity pole row, matching the solver's ghost node
        h = grid.h[0]
        div0 = 2.0 * n * (u[1] - u[0]) / h ** 2
        q0 = dg(u[0]) / g(u[0])
        H[0] = (q0 - div0) / profile.phi(u[0])
    return H


def _eprime_1d(grid, g, dg, u):
    h = grid.h[0]
    m = grid.weight_mid
    ubar = 0.5 * (u[:-1] + u[1:])
    p = (u[1:] - u[:-1]) / h
    w = np.sqrt(1.0 + p * p)
    flux = g(ubar) * m * p / w
    bulk = 0.5 * h * dg(ubar) * m * w
    eprime = np.zeros(u.size)
    eprime[:-1] += bulk - flux
    eprime[1:] += bulk + flux
    vnode = np.zeros(u.size)
    vnode[:-1] += 0.5 * h * m
    vnode[1:] += 0.5 * h * m
    return eprime, vnode


def _eprime_2d(grid, g, dg, u):
    from .solver import _assemble_2d
    eprime, vnode, _ = _assemble_2d(grid, (g, dg, None), u, need_matrix=False)
    return eprime, vnode


def graph_mean_curvature(d, profile, u, scheme="composite"):
    """Mean curvature of the graph of u, upward normal convention.

    Raises when any nodal value reaches the cone end A (out of the cone).
    scheme selects the discrete route; see the module docstring.
    """
    grid = u.grid
    if grid.domain != d:
        raise geo.GridMismatchError("field does not live on the given domain")
    vals = u.values
    if np.any(vals >= profile.A):
        raise ValueError("graph leaves the cone: u >= A somewhere")
    comp = _nodal_curvature_composite(grid, profile, vals)
    if scheme == "composite":
        H = comp
    elif scheme == "compact":
        H = _nodal_curvature_compact(grid, profile, vals)
        H[grid.boundary] = comp[grid.boundary]   # no full cells at the boundary
    else:
        raise ValueError(f"unknown scheme '{scheme}'")
    return CurvatureField(ScalarField(grid, H), "upward-graph", grid.boundary.copy())


def conformal_mean_curvature(H, df_normal, m, f_value):
    """Mean curvature after the conformal change g -> e^{2f} g.

    H is the curvature measured in g for a unit normal v; df_normal is
    df(v); m the ambient dimension (>= 2).  Returns e^{-f}(H + (m-1) df(v)).
    """
    if m < 2:
        raise ValueError("ambient dimension must be >= 2")
    return math.exp(-f_value) * (H + (m - 1) * df_normal)


@dataclass
class SlabReport:
    """Outward-normal curvature summary for the three smooth slab pieces.

    lower graph (A): solver-consistent |H|, machine-small for a converged
    base solve, with its signed outward (downward) extremes; top slice (B):
    n phi'(alpha)/phi^2(alpha); lateral wall (C): H_boundary / phi(t)
    sampled over the lateral height span.
    """

    piece_a_max_abs: float
    piece_a_min_signed: float
    piece_b: float
    piece_c_min: float
    piece_c_samples: list

    def min_curvature(self):
        return min(self.piece_a_min_signed, self.piece_b, self.piece_c_min)


def slab_boundary_report(d, profile, u_minus_k, alpha, residual_tol=1e-6,
                         lateral_samples=33):
    """Curvatures of the slab pieces between the graph of u_{-k} and height alpha.

    Requires u_minus_k to solve the minimal graph equation: its
    solver-consistent curvature must stay below residual_tol, otherwise a
    ValueError reports the non-solution.  All pieces use the outward
    convention of the slab.
    """
    grid = u_minus_k.grid
    if grid.domain != d:
        raise geo.GridMismatchError("field does not live on the given domain")
    if not float(np.max(u_minus_k.values)) <= alpha < profile.A:
        raise ValueError("slab top must satisfy max u_{-k} <= alpha < A")

    Hup = graph_mean_curvature(d, profile, u_minus_k, scheme="compact")
    a_int = Hup.interior_values()
    a_max = float(np.max(np.abs(a_int)))
    if a_max > residual_tol:
        raise ValueError(
            f"u_minus_k is not a solution: interior |H| = {a_max:.3e} > {residual_tol:.1e}")
    # outward normal of the slab points downward along the lower graph
    a_signed = -a_int
    piece_a_min = float(np.min(a_signed))

    phi_a = profile.phi(alpha)
    piece_b = d.n * profile.dphi(alpha) / phi_a ** 2

    h_bdry = min(geo.boundary_mean_curvature(d).values.values())
    lo = float(np.min(u_minus_k.values[grid.boundary]))
    ts = np.linspace(lo, alpha, lateral_samples)
    c_vals = h_bdry / profile.phi(ts)
    return SlabReport(a_max, piece_a_min, float(piece_b),
                      float(np.min(c_vals)), c_vals.tolist())


def foliation_mean_curvature(alpha, n, t, points):
    """Curvature of the level hypersurface x_{n+1} = t of the model foliation.

    points: array (m, n+1) of Euclidean sample coordinates whose last
    component equals t > 0; they are pulled back through the polar map
    (r = log rho).  The normal points to positive infinity and its radial
    projection is taken as x_{n+1}/rho, so

        H_alpha = exp(-((alpha-n)/n) r) * ((alpha-n)/n) * x_{n+1}/rho,

    identically zero when alpha = n.
    """
    if t <= 0:
        raise ValueError("the foliation parameter t must be positive")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != n + 1:
        raise ValueError(f"points must have shape (m, {n + 1})")
    if np.max(np.abs(pts[:, -1] - t)) > 1e-12 * max(1.0, t):
        raise ValueError("points must lie on the slice x_{n+1} = t")
    rho = np.sqrt(np.sum(pts * pts, axis=1))
    r = np.log(rho)
    k = (alpha - n) / n
    if k == 0:
        return np.zeros(pts.shape[0])
    return np.exp(-k * r) * k * (pts[:, -1] / rho)
