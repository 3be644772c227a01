"""Graph-area functionals, the boundary jump term and competitor tests.

The area of the graph of u in the conformal cone is

    area(u) = integral_Omega  phi^n(u) sqrt(1 + |Du|^2) dvol_sigma,

evaluated with the same cell quadrature the solver's energy uses (midpoint
metric weight and phi^n, exact per-cell gradients), so the exact discrete
gradient computed here corresponds to the solver residual at machine
tolerance.  Radial kinds include the full angular sphere factor, making
constants integrate to phi^n(c) * vol(Omega) exactly where the volume
quadrature is exact.

The translating specialization (phi^n = e^{alpha u}) is the conformal area
functional; its mass-with-jump variant adds the boundary mismatch integral
(1/alpha) |e^{alpha u} - e^{alpha psi}| over the domain boundary.

Perturbation tests add seeded, compactly supported C^1 bumps to a solved
graph and record the area excess; they operationalize minimality among
graph competitors only (set-theoretic competitors are out of scope).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .geometry import ScalarField, sphere_area
from .profiles import translating_profile
from .solver import boundary_values

__all__ = [
    "FunctionalValue", "PerturbationReport", "graph_area", "conformal_functional",
    "mass_with_jump", "functional_gradient", "perturbation_test", "boundary_measures",
]


@dataclass(frozen=True)
class FunctionalValue:
    """Area value split into its interior integral and boundary jump term."""

    value: float
    interior: float
    jump: float


def _angular_factor(domain):
    return sphere_area(domain.n - 1) if domain.radial else 1.0


def _cell_terms_1d(grid, gfun, u):
    h = grid.h[0]
    m = grid.weight_mid
    ubar = 0.5 * (u[:-1] + u[1:])
    p = (u[1:] - u[:-1]) / h
    w = np.sqrt(1.0 + p * p)
    return h * m * gfun(ubar) * w


def _tri_terms_2d(grid, gfun, u):
    from .solver import _tri_grads, _tri_layout
    lower, upper = _tri_layout(grid)
    bl, bu = _tri_grads(grid)
    area = 0.5 * grid.h[0] * grid.h[1]
    out = []
    for tris, b in ((lower, bl), (upper, bu)):
        uv = u[tris]
        P = uv @ b
        w = np.sqrt(1.0 + np.einsum("ij,ij->i", P, P))
        out.append(area * gfun(uv.mean(axis=1)) * w)
    return np.concatenate(out)


def graph_area(u, d, profile):
    """Area of the graph of u in the cone over d with the given profile."""
    grid = u.grid
    if grid.domain != d:
        raise geo.GridMismatchError("field does not live on the given domain")
    if np.any(u.values >= profile.A):
        raise ValueError("graph leaves the cone: u >= A somewhere")
    g = lambda r: profile.phin(r, d.n)
    if d.kind == "rectangle":
        terms = _tri_terms_2d(grid, g, u.values)
    else:
        terms = _cell_terms_1d(grid, g, u.values)
    return float(np.sum(terms)) * _angular_factor(d)


def conformal_functional(u, d, alpha):
    """The conformal area functional (smooth-graph evaluation), alpha > 0."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    val = graph_area(u, d, translating_profile(alpha, d.n))
    return FunctionalValue(val, val, 0.0)


def boundary_measures(grid):
    """Quadrature weights of the boundary nodes (for jump integrals)."""
    d = grid.domain
    if d.kind == "interval":
        return np.ones(2)
    if d.radial:
        rho0 = d.params[0]
        w = rho0 ** (d.n - 1) if d.kind == "flat_disk" else math.sin(rho0) ** (d.n - 1)
        return np.array([w * sphere_area(d.n - 1)])
    # rectangle frame: trapezoid weights along each edge, halved at corners
    nx, ny = grid.shape
    hx, hy = grid.h
    wts = np.zeros((nx, ny))
    for i in (0, nx - 1):          # vertical edges run along y
        wts[i, :] += hy
        wts[i, 0] -= 0.5 * hy
        wts[i, -1] -= 0.5 * hy
    for j in (0, ny - 1):          # horizontal edges run along x
        wts[:, j] += hx
        wts[0, j] -= 0.5 * hx
        wts[-1, j] -= 0.5 * hx
    return wts.ravel()[grid.boundary]


def mass_with_jump(u, psi, alpha, d):
    """Conformal functional plus the boundary trace-mismatch term.

    The jump integrand (1/alpha)|e^{alpha u} - e^{alpha psi}| is symmetric
    in the trace and the data and vanishes when they agree.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    grid = u.grid
    interior = conformal_functional(u, d, alpha).interior
    psi_vals = boundary_values(grid, psi)
    trace = u.values[grid.boundary]
    w = boundary_measures(grid)
    jump = float(np.sum(w * np.abs(np.exp(alpha * trace) - np.exp(alpha * psi_vals)) / alpha))
    return FunctionalValue(interior + jump, interior, jump)


def functional_gradient(u, d, profile):
    """Exact gradient of graph_area with respect to the interior node values.

    Assembled here from the cell terms directly (not shared with the
    solver's residual code) so residual/first-variation comparisons check
    two implementations against each other.  Returns an array over all
    nodes with zeros at boundary positions.
    """
    grid = u.grid
    if grid.domain != d:
        raise geo.GridMismatchError("field does not live on the given domain")
    n = d.n
    g = lambda r: profile.phin(r, n)
    dg = lambda r: profile.dphin(r, n)
    vals = u.values
    grad = np.zeros(grid.size)
    if d.kind == "rectangle":
        from .solver import _tri_grads, _tri_layout
        lower, upper = _tri_layout(grid)
        bl, bu = _tri_grads(grid)
        area = 0.5 * grid.h[0] * grid.h[1]
        for tris, b in ((lower, bl), (upper, bu)):
            uv = vals[tris]
            P = uv @ b
            w = np.sqrt(1.0 + np.einsum("ij,ij->i", P, P))
            pb = P @ b.T
            contrib = area * (dg(uv.mean(axis=1))[:, None] * w[:, None] / 3.0
                              + g(uv.mean(axis=1))[:, None] * pb / w[:, None])
            np.add.at(grad, tris, contrib)
    else:
        h = grid.h[0]
        m = grid.weight_mid
        ubar = 0.5 * (vals[:-1] + vals[1:])
        p = (vals[1:] - vals[:-1]) / h
        w = np.sqrt(1.0 + p * p)
        flux = g(ubar) * m * p / w
        bulk = 0.5 * h * dg(ubar) * m * w
        grad[:-1] += bulk - flux
        grad[1:] += bulk + flux
    grad *= _angular_factor(d)
    grad[grid.boundary] = 0.0
    return grad


@dataclass
class PerturbationReport:
    trials: int
    violations: int
    min_excess: float
    seed: int
    amplitude_range: tuple
    excesses: list = field(default_factory=list)

    def as_dict(self):
        return {
            "trials": self.trials, "violations": self.violations,
            "min_excess": self.min_excess, "seed": self.seed,
            "amplitude_range": list(self.amplitude_range),
        }


def _bump(grid, rng, amplitude_range, width_range):
    """Tensor-product C^1 hat with randomized center/width/amplitude,
    supported strictly inside the domain."""
    d = grid.domain
    amp = rng.uniform(*amplitude_range) * rng.choice([-1.0, 1.0])

    def hat(xi):
        s = np.clip(np.abs(xi), 0.0, 1.0)
        return (1.0 - s * s) ** 2

    if d.kind == "rectangle":
        a, b = d.params
        wx = rng.uniform(width_range[0] * a, width_range[1] * a)
        wy = rng.uniform(width_range[0] * b, width_range[1] * b)
        cx = rng.uniform(wx, a - wx)
        cy = rng.uniform(wy, b - wy)
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        return amp * (hat((X - cx) / wx) * hat((Y - cy) / wy)).ravel()
    if d.kind == "interval":
        lo, hi = d.params
        L = hi - lo
        w = rng.uniform(width_range[0] * L, width_range[1] * L)
        c = rng.uniform(lo + w, hi - w)
        return amp * hat((grid.x - c) / w)
    R = d.params[0]
    w = rng.uniform(width_range[0] * R, width_range[1] * R)
    c = rng.uniform(w, R - w)   # support away from both the pole and the rim
    return amp * hat((grid.x - c) / w)


def perturbation_test(u_solution, d, profile, trials=100, seed=0,
                      amplitude_range=(0.005, 0.2), width_range=(0.1, 0.3)):
    """Compare the solved graph's area against seeded bump competitors.

    Each trial adds a compactly supported, interior C^1 hat of random
    center, width and signed amplitude and records
    graph_area(u + bump) - graph_area(u); violations counts excesses below
    -1e-10.  The seed is part of the report for reproducibility; trials
    are deterministic in (seed, trial index).
    """
    base = graph_area(u_solution, d, profile)
    excesses = []
    violations = 0
    for k in range(trials):
        rng = np.random.default_rng((seed, k))
        bump = _bump(u_solution.grid, rng, amplitude_range, width_range)
        competitor = ScalarField(u_solution.grid, u_solution.values + bump)
        excess = graph_area(competitor, d, profile) - base
        excesses.append(excess)
        if excess < -1e-10:
            violations += 1
    return PerturbationReport(trials, violations,
                              float(np.min(excesses)) if excesses else 0.0,
                              seed, amplitude_range, excesses)
