"""Damped-Newton continuation solver for the minimal graph equation.

Solves div(Du/w) = n phi'(u) / (phi(u) w), w = sqrt(1 + |Du|^2), with
Dirichlet data psi < A, on the structured grids of the geometry module.

Discretization.  The graph-area energy  sum_cells |cell| * m * phi^n(u) * w
(midpoint quadrature for the metric weight m and for phi^n, exact per-cell
gradients) is differentiated exactly; the nodal residual is the discrete
Euler-Lagrange gradient rescaled by -1 / (phi^n(u) * V_node), a
second-order approximation of div(Du/w) - n phi'(u)/(phi(u) w).  The solver
residual therefore agrees with the discrete gradient of the area
functional to machine precision, which makes first-variation checks
meaningful at solver tolerance rather than discretization tolerance.
Rectangles use the same energy over P1 triangles (lower-left / upper-right
split), radial kinds a 1D cell chain whose first cell absorbs the pole
through the midpoint metric weight.

Newton.  Exact analytic Jacobian assembled from per-cell Hessians into a
banded matrix, solved by direct banded LU; backtracking line search with
step halving; iterates at or beyond the cone end A are clamped to
A - 1e-8 (A - max psi) and the clamp is reported.

Continuation realizes the family  div(Du/w) = s n phi'(u)/(phi(u) w),
u|_boundary = s psi  (equivalently the profile power phi^{ns}); steps halve
adaptively on failure.  Blow-up classification is heuristic and documented
as evidence, not proof: gradient beyond a threshold while the residual
stalls, or gradient growth beyond a factor between continuation steps; a
converged solve whose gradient exceeds the threshold keeps status
"converged" but raises the blow_up_suspected flag.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import geometry as geo
from .geometry import ScalarField
from .profiles import check_cA, check_cC, translating_profile

__all__ = [
    "SolverConfig", "SolveReport", "SolveError", "InfinityReport", "SlabDescriptor",
    "solve_dirichlet", "solve_translating", "barrier_bounds", "comparison_check",
    "solve_infinity", "detect_nonexistence_sweep", "build_slab",
    "boundary_values", "harmonic_extension", "max_gradient",
]


class SolveError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-10
    max_newton_iters: int = 50
    min_damping: float = 2.0 ** -20
    continuation_steps: int = 8
    continuation_max_depth: int = 12
    blowup_gradient_threshold: float = 1e3
    blowup_growth_factor: float = 10.0

    def __post_init__(self):
        if min(self.residual_tol, self.min_damping, self.blowup_gradient_threshold,
               self.blowup_growth_factor) <= 0:
            raise ValueError("solver config entries must be positive")
        if self.min_damping >= 1:
            raise ValueError("min damping step must be < 1")


@dataclass
class SolveReport:
    status: str = "max_iter"            # converged | blow_up_suspected | max_iter
    blow_up_suspected: bool = False
    final_residual: float = math.inf
    residual_history: list = field(default_factory=list)
    max_gradient: float = 0.0
    continuation_trace: list = field(default_factory=list)
    newton_iterations: int = 0
    clamped: bool = False
    wall_time: float = 0.0

    @property
    def converged(self):
        return self.status == "converged"

    def as_dict(self):
        return {
            "status": self.status,
            "blow_up_suspected": self.blow_up_suspected,
            "final_residual": self.final_residual,
            "max_gradient": self.max_gradient,
            "newton_iterations": self.newton_iterations,
            "clamped": self.clamped,
            "wall_time": self.wall_time,
            "residual_history": list(self.residual_history),
            "continuation_trace": list(self.continuation_trace),
        }


# ---------------------------------------------------------------------------
# boundary data handling

def boundary_values(grid, psi):
    """Normalize boundary data to an array over grid.boundary (index order).

    Accepts a constant, a callable of the coordinate columns, or an array
    matching the boundary index set.
    """
    nb = grid.boundary.size
    if callable(psi):
        cols = grid.coords()
        vals = psi(*[c[grid.boundary] for c in cols.values()])
        return np.broadcast_to(np.asarray(vals, dtype=float), (nb,)).copy()
    arr = np.asarray(psi, dtype=float)
    if arr.ndim == 0:
        return np.full(nb, float(arr))
    if arr.size != nb:
        raise ValueError(f"boundary data length {arr.size} != boundary node count {nb}")
    return arr.astype(float).reshape(-1)


# ---------------------------------------------------------------------------
# profile-power helpers (continuation family phi^{n s})

def _gfuncs(profile, n, s=1.0):
    """g = phi^{n s} and its first two derivatives, as callables of u."""
    if s == 1.0:
        return (lambda r: profile.phin(r, n),
                lambda r: profile.dphin(r, n),
                lambda r: profile.d2phin(r, n))
    ns = n * s

    def g(r):
        return profile.phi(r) ** ns

    def dg(r):
        return ns * profile.phi(r) ** (ns - 1) * profile.dphi(r)

    def d2g(r):
        p, dp, d2p = profile.phi(r), profile.dphi(r), profile.d2phi(r)
        return ns * ((ns - 1) * p ** (ns - 2) * dp ** 2 + p ** (ns - 1) * d2p)

    return g, dg, d2g


_ONE = (lambda r: np.ones_like(np.asarray(r, dtype=float)),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)))


# ---------------------------------------------------------------------------
# assembly: 1D cell chain (interval and radial kinds)

def _assemble_1d(grid, gfns, u, need_matrix):
    """Euler-Lagrange gradient E', node volumes, g(u), banded Hessian."""
    g, dg, d2g = gfns
    h = grid.h[0]
    m = grid.weight_mid
    ubar = 0.5 * (u[:-1] + u[1:])
    p = (u[1:] - u[:-1]) / h
    w = np.sqrt(1.0 + p * p)
    gq, dgq = g(ubar), dg(ubar)
    flux = gq * m * p / w
    bulk = 0.5 * h * dgq * m * w

    n_nodes = u.size
    eprime = np.zeros(n_nodes)
    eprime[:-1] += bulk - flux
    eprime[1:] += bulk + flux

    vnode = np.zeros(n_nodes)
    vnode[:-1] += 0.5 * h * m
    vnode[1:] += 0.5 * h * m

    if not need_matrix:
        return eprime, vnode, None

    d2gq = d2g(ubar)
    wp = p / w
    wpp = 1.0 / w ** 3
    haa = h * m * (0.25 * d2gq * w - dgq * wp / h + gq * wpp / (h * h))
    hbb = h * m * (0.25 * d2gq * w + dgq * wp / h + gq * wpp / (h * h))
    hab = h * m * (0.25 * d2gq * w - gq * wpp / (h * h))

    bands = np.zeros((3, n_nodes))
    bands[1, :-1] += haa
    bands[1, 1:] += hbb
    bands[0, 1:] = hab      # superdiagonal H[j, j+1]
    bands[2, :-1] = hab     # subdiagonal H[j+1, j]
    return eprime, vnode, bands


# ---------------------------------------------------------------------------
# assembly: rectangle, P1 triangles

def _tri_layout(grid):
    nx, ny = grid.shape
    ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    base = (ii * ny + jj).ravel()
    lower = np.stack([base, base + ny, base + 1], axis=1)
    upper = np.stack([base + ny + 1, base + 1, base + ny], axis=1)
    return lower, upper


def _tri_grads(grid):
    hx, hy = grid.h
    bl = np.array([[-1.0 / hx, -1.0 / hy], [1.0 / hx, 0.0], [0.0, 1.0 / hy]])
    bu = np.array([[1.0 / hx, 1.0 / hy], [-1.0 / hx, 0.0], [0.0, -1.0 / hy]])
    return bl, bu


def _assemble_2d(grid, gfns, u, need_matrix):
    g, dg, d2g = gfns
    hx, hy = grid.h
    area = 0.5 * hx * hy
    lower, upper = _tri_layout(grid)
    bl, bu = _tri_grads(grid)
    n_nodes = u.size
    ny = grid.shape[1]

    eprime = np.zeros(n_nodes)
    vnode = np.zeros(n_nodes)
    bands = np.zeros((2 * ny + 1, n_nodes)) if need_matrix else None

    for tris, b in ((lower, bl), (upper, bu)):
        uv = u[tris]
        ubar = uv.mean(axis=1)
        P = uv @ b
        w = np.sqrt(1.0 + np.einsum("ij,ij->i", P, P))
        gq, dgq = g(ubar), dg(ubar)
        pb = P @ b.T
        contrib = area * (dgq[:, None] * w[:, None] / 3.0 + gq[:, None] * pb / w[:, None])
        np.add.at(eprime, tris, contrib)
        np.add.at(vnode, tris, area / 3.0)
        if need_matrix:
            d2gq = d2g(ubar)
            bb = b @ b.T
            for al in range(3):
                for be in range(3):
                    hv = area * (d2gq * w / 9.0
                                 + dgq * (pb[:, al] + pb[:, be]) / (3.0 * w)
                                 + gq * (bb[al, be] / w - pb[:, al] * pb[:, be] / w ** 3))
                    rows, cols = tris[:, al], tris[:, be]
                    # (rows, cols) pairs are distinct for a fixed (al, be)
                    bands[ny + rows - cols, cols] += hv

    return eprime, vnode, bands


def _assemble(grid, gfns, u, need_matrix=False):
    if grid.domain.kind == "rectangle":
        return _assemble_2d(grid, gfns, u, need_matrix)
    return _assemble_1d(grid, gfns, u, need_matrix)


def _bandwidth(grid):
    return grid.shape[1] if grid.domain.kind == "rectangle" else 1


def _residual(grid, gfns, u, psi_vals, need_matrix=False):
    """Scaled PDE residual F (and its exact banded Jacobian).

    Interior rows: -E'_j / (g(u_j) V_j), a consistent discretization of
    div(Du/w) - (log g)'(u) / w.  Boundary rows: u - psi, identity in J.
    At a radial pole the cell-energy row is replaced by the removable-
    singularity limit: a ghost node enforces u'(0) = 0, the singular
    (n-1)/rho (resp. (n-1)cot rho) channel becomes (n-1) u''(0), and the
    row reads 2n (u_1 - u_0)/h^2 - (log g)'(u_0).
    """
    g, dg, d2g = gfns
    eprime, vnode, bands = _assemble(grid, gfns, u, need_matrix)
    gnode = g(u)
    scale = gnode * vnode
    F = np.empty(u.size)
    F[:] = -eprime / scale
    F[grid.boundary] = u[grid.boundary] - psi_vals
    pole = grid.has_pole
    if pole:
        n = grid.domain.n
        h = grid.h[0]
        q0 = dg(u[0]) / gnode[0]
        F[0] = 2.0 * n * (u[1] - u[0]) / h ** 2 - q0
    if not need_matrix:
        return F, None

    kl = _bandwidth(grid)
    ncols = u.size
    J = np.zeros_like(bands)
    for k in range(2 * kl + 1):
        off = k - kl                       # row - col
        j0 = max(0, -off)
        j1 = min(ncols, ncols - off)
        if j1 <= j0:
            continue
        rows = np.arange(j0, j1) + off
        J[k, j0:j1] = -bands[k, j0:j1] / scale[rows]
    # derivative of the -1/(g V) rescaling (vanishes at a solution)
    J[kl, :] += eprime * dg(u) * vnode / scale ** 2
    if pole:
        n = grid.domain.n
        h = grid.h[0]
        g0, dg0 = gnode[0], dg(u[0])
        dq0 = (d2g(u[0]) * g0 - dg0 * dg0) / g0 ** 2
        J[kl, 0] = -2.0 * n / h ** 2 - dq0       # d F_0 / d u_0
        J[kl - 1, 1] = 2.0 * n / h ** 2          # d F_0 / d u_1
    # Dirichlet rows are the identity
    bmask = np.zeros(ncols, dtype=bool)
    bmask[grid.boundary] = True
    for k in range(2 * kl + 1):
        off = k - kl
        j0 = max(0, -off)
        j1 = min(ncols, ncols - off)
        if j1 <= j0:
            continue
        cols = np.arange(j0, j1)
        sel = bmask[cols + off]
        J[k, cols[sel]] = 1.0 if off == 0 else 0.0
    return F, J


def max_gradient(grid, u):
    """Max nodal |Du| from the geometry module's discrete gradient."""
    gv = geo.gradient(ScalarField(grid, u))
    return float(np.max(np.sqrt(np.sum(gv * gv, axis=0))))


def harmonic_extension(grid, psi):
    """Extend boundary data by solving the linearized (Laplace) problem once."""
    psi_vals = boundary_values(grid, psi)
    u0 = np.zeros(grid.size)
    # one Newton step from u == 0: the phi == 1 energy is exactly quadratic
    # there, so the step solves the metric-aware discrete Laplace problem
    F, J = _residual(grid, _ONE, u0, psi_vals, need_matrix=True)
    kl = _bandwidth(grid)
    return u0 + solve_banded((kl, kl), J, -F)


# ---------------------------------------------------------------------------
# Newton iteration

_STALL_WINDOW = 5
_STALL_FACTOR = 0.5


def _resnorm(F, grid):
    v = np.max(np.abs(F))
    return float(v) if np.isfinite(v) else math.inf


def _newton(grid, gfns, u, psi_vals, cfg, clamp_cap, report):
    """Damped Newton on the scaled residual; mutates and returns u."""
    kl = _bandwidth(grid)
    hist = []
    for it in range(cfg.max_newton_iters + 1):
        F, _ = _residual(grid, gfns, u, psi_vals)
        norm = _resnorm(F, grid)
        hist.append(norm)
        report.residual_history.append(norm)
        if norm <= cfg.residual_tol:
            return u, True, hist
        if it == cfg.max_newton_iters:
            break
        # stalled residual at large gradient: suspected blow-up
        if (len(hist) > _STALL_WINDOW
                and hist[-1] > _STALL_FACTOR * hist[-1 - _STALL_WINDOW]
                and max_gradient(grid, u) > cfg.blowup_gradient_threshold):
            report.blow_up_suspected = True
            return u, False, hist
        _, J = _residual(grid, gfns, u, psi_vals, need_matrix=True)
        try:
            d = solve_banded((kl, kl), J, -F)
        except np.linalg.LinAlgError:
            return u, False, hist
        if not np.all(np.isfinite(d)):
            return u, False, hist
        lam = 1.0
        accepted = False
        while lam >= cfg.min_damping:
            trial = u + lam * d
            if clamp_cap is not None and np.any(trial > clamp_cap):
                trial = np.minimum(trial, clamp_cap)
                report.clamped = True
            Ft, _ = _residual(grid, gfns, trial, psi_vals)
            tn = _resnorm(Ft, grid)
            if tn < (1.0 - 1e-4 * lam) * norm:
                u = trial
                accepted = True
                break
            lam *= 0.5
        report.newton_iterations += 1
        if not accepted:
            return u, False, hist
    return u, False, hist


def _solve(grid, profile, psi_vals, cfg, initial_guess=None):
    """Continuation driver; returns (u, report)."""
    t0 = time.perf_counter()
    report = SolveReport()
    n = grid.domain.n
    A = profile.A
    if np.any(psi_vals >= A):
        raise ValueError("boundary data must stay strictly below the cone end A")
    clamp_cap = None
    if math.isfinite(A):
        clamp_cap = A - 1e-8 * (A - float(np.max(psi_vals)))

    def attempt(u_start, s):
        u_start = u_start.copy()
        u_start[grid.boundary] = s * psi_vals
        if clamp_cap is not None:
            u_start = np.minimum(u_start, clamp_cap)
        gfns = _gfuncs(profile, n, s)
        u_out, ok, hist = _newton(grid, gfns, u_start, s * psi_vals, cfg, clamp_cap, report)
        report.continuation_trace.append(
            {"s": s, "converged": ok, "residual": hist[-1], "iterations": len(hist) - 1})
        return u_out, ok

    if initial_guess is not None:
        u = np.asarray(initial_guess, dtype=float).reshape(-1).copy()
        if u.size != grid.size:
            raise ValueError("initial guess does not match the grid")
        u, ok = attempt(u, 1.0)
        if ok:
            return _finish(grid, u, report, cfg, t0)
        report.continuation_trace.append({"restart": "continuation ladder"})

    uh = harmonic_extension(grid, psi_vals)
    s_prev, u_prev = 0.0, np.zeros(grid.size)
    grad_prev = None
    targets = list(np.linspace(0.0, 1.0, cfg.continuation_steps + 1)[1:])
    depth = 0
    while targets:
        s = targets[0]
        u_start = u_prev + (s - s_prev) * uh
        u, ok = attempt(u_start, s)
        if ok:
            grad = max_gradient(grid, u)
            if grad_prev is not None and grad > cfg.blowup_growth_factor * max(grad_prev, 1.0):
                report.blow_up_suspected = True
            grad_prev = grad
            targets.pop(0)
            s_prev, u_prev = s, u
            continue
        if report.blow_up_suspected:
            break
        depth += 1
        if depth > cfg.continuation_max_depth:
            break
        targets.insert(0, 0.5 * (s_prev + s))

    if s_prev == 1.0:
        return _finish(grid, u_prev, report, cfg, t0)
    report.status = "blow_up_suspected" if report.blow_up_suspected else "max_iter"
    report.final_residual = report.residual_history[-1] if report.residual_history else math.inf
    report.max_gradient = max_gradient(grid, u_prev if s_prev > 0 else uh)
    report.wall_time = time.perf_counter() - t0
    return ScalarField(grid, u_prev), report


def _finish(grid, u, report, cfg, t0):
    report.status = "converged"
    report.final_residual = report.residual_history[-1]
    report.max_gradient = max_gradient(grid, u)
    if report.max_gradient > cfg.blowup_gradient_threshold:
        report.blow_up_suspected = True
    report.wall_time = time.perf_counter() - t0
    return ScalarField(grid, u), report


# ---------------------------------------------------------------------------
# public operations

def solve_dirichlet(grid, profile, psi, cfg=None, initial_guess=None):
    """Solve the minimal graph equation with Dirichlet data psi.

    psi may be a constant, a callable of boundary coordinates, or an array
    over the boundary index set; it must stay strictly below the profile's
    upper endpoint A.  Returns (ScalarField, SolveReport); deterministic
    for fixed inputs and configuration.
    """
    cfg = cfg or SolverConfig()
    psi_vals = boundary_values(grid, psi)
    return _solve(grid, profile, psi_vals, cfg, initial_guess)


def solve_translating(grid, alpha, psi, cfg=None, initial_guess=None):
    """Solve div(Du/w) = alpha / w (the translating right-hand side)."""
    profile = translating_profile(alpha, grid.domain.n)
    return solve_dirichlet(grid, profile, psi, cfg, initial_guess)


def barrier_bounds(grid, profile, psi, cfg=None):
    """Bracket solutions: upper constant max(psi), lower translating barrier.

    The lower barrier solves div(Du/w) = beta / w with constant data
    min(psi), where beta bounds n phi'/phi from above on (-inf, max psi];
    for translating profiles beta equals alpha exactly.
    """
    cfg = cfg or SolverConfig()
    psi_vals = boundary_values(grid, psi)
    top = float(np.max(psi_vals))
    n = grid.domain.n
    if profile.label == "translating":
        beta = float(profile.params["alpha"])
    else:
        rs = np.linspace(top - 60.0, top, 4096)
        beta = n * float(np.max(profile.log_slope(rs)))
    w, rep = solve_translating(grid, beta, float(np.min(psi_vals)), cfg)
    if not rep.converged:
        raise SolveError("barrier solve failed", rep)
    return w, top


def comparison_check(u1, u2, report1, report2, slack=1e-10):
    """Ordered boundary data must give ordered solutions (log-convex phi).

    Preconditions: both solves converged, same grid, boundary of u1 below
    boundary of u2.  Returns True iff u1 <= u2 + slack nodewise.
    """
    if not (report1.converged and report2.converged):
        raise ValueError("comparison requires two converged solves")
    g = u1.grid
    if u2.grid.shape != g.shape or u2.grid.domain != g.domain:
        raise geo.GridMismatchError("comparison requires a common grid")
    b1 = u1.values[g.boundary]
    b2 = u2.values[g.boundary]
    if np.any(b1 > b2 + slack):
        raise ValueError("boundary data are not ordered")
    return bool(np.all(u1.values <= u2.values + slack))


@dataclass
class InfinityReport:
    steps: list
    monotone: bool
    cauchy_achieved: bool
    final_gap: float
    inner_nodes: np.ndarray
    mu_floor: float

    def as_dict(self):
        return {
            "steps": self.steps,
            "monotone": self.monotone,
            "cauchy_achieved": self.cauchy_achieved,
            "final_gap": self.final_gap,
            "mu_floor": self.mu_floor,
        }


def solve_infinity(grid, profile, cfg=None, t_schedule=None, gap_tol=1e-4):
    """Push boundary data to the cone end A along t_schedule.

    Requires a finite A with conditions cA/cC holding on sampled windows
    and a domain declared mean convex with the NCM hypothesis.  Each member
    problem has constant data t_j and is warm-started from its predecessor.
    Interior convergence is declared on the inner half-domain (nodes
    farther from the boundary than half the inradius).  Returns
    (u_limit, InfinityReport); member solve failure raises SolveError.
    """
    cfg = cfg or SolverConfig()
    d = grid.domain
    A = profile.A
    if not math.isfinite(A):
        raise ValueError("the infinity problem needs a finite upper endpoint A")
    if not (d.mean_convex_declared and d.ncm_declared):
        raise ValueError("domain must be declared mean convex with the NCM property")
    win = (A - 20.0, A - 1e-6)
    if not check_cA(profile, win, A - 1.0).holds:
        raise ValueError("profile fails condition cA on the sampled window")
    if not check_cC(profile, (A - 10.0, A - 1e-8)).holds:
        raise ValueError("profile fails condition cC on the sampled window")
    if t_schedule is None:
        t_schedule = [A - 2.0 ** -j for j in range(1, 13)]
    ts = [float(t) for t in t_schedule]
    if any(t >= A for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_schedule must increase strictly toward A")

    dist = grid.node_boundary_distance()
    inner = np.flatnonzero(dist > 0.5 * float(np.max(dist)))
    steps = []
    monotone = True
    gap = math.inf
    u_prev = None
    mu_floor = math.inf
    for t in ts:
        u, rep = solve_dirichlet(grid, profile, t, cfg,
                                 initial_guess=None if u_prev is None else u_prev.values)
        if not rep.converged:
            raise SolveError(f"member solve at t = {t} failed ({rep.status})", rep)
        rec = {"t": t, "min_u": float(np.min(u.values)),
               "max_gradient": rep.max_gradient}
        mu_floor = min(mu_floor, rec["min_u"])
        if u_prev is not None:
            if np.any(u.values < u_prev.values - 1e-10):
                monotone = False
            gap = float(np.max(np.abs(u.values[inner] - u_prev.values[inner])))
            rec["inner_gap"] = gap
        steps.append(rec)
        u_prev = u
    return u_prev, InfinityReport(steps, monotone, gap < gap_tol, gap, inner, mu_floor)


def detect_nonexistence_sweep(cap_radii, alpha, n, cfg=None, resolution=1025,
                              run_oracle=True, threads=None):
    """Solve on a family of spherical caps and record gradient growth.

    All radii must stay inside the open hemisphere (< pi/2), where each cap
    is mean convex with the NCM property.  Failures are data, not errors.
    A row is classified "growing" when its solve did not converge cleanly
    or its max |Du| exceeds the blow-up growth factor times the first
    radius' baseline (floored at 1).  With run_oracle, the RK shooting
    oracle's boundary derivative is recorded alongside.
    """
    cfg = cfg or SolverConfig()
    radii = [float(r) for r in cap_radii]
    if any(r >= math.pi / 2 for r in radii):
        raise ValueError("cap radii must stay strictly inside the open hemisphere")

    def run_one(r):
        grid = geo.build_grid(geo.spherical_cap(r, n), resolution)
        u, rep = solve_translating(grid, alpha, 0.0, cfg)
        row = {
            "radius": r,
            "status": rep.status,
            "blow_up_suspected": rep.blow_up_suspected,
            "max_gradient": rep.max_gradient,
            "residual": rep.final_residual,
            "max_abs_u": float(np.max(np.abs(u.values))),
        }
        if run_oracle:
            from .oracles import radial_shoot
            sol = radial_shoot("spherical_cap", alpha=alpha, n=n, rho0=r,
                               boundary_value=0.0)
            row["oracle_boundary_slope"] = sol.boundary_slope if sol.found else math.inf
            row["oracle_found"] = sol.found
        return row

    if threads is None:
        threads = int(os.environ.get("CONCONE_THREADS", "1"))
    if threads > 1 and len(radii) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(threads, len(radii))) as pool:
            rows = list(pool.map(run_one, radii))   # merged in input order
    else:
        rows = [run_one(r) for r in radii]

    base = max(rows[0]["max_gradient"], 1.0)
    for row in rows:
        growing = (row["status"] != "converged" or row["blow_up_suspected"]
                   or row["max_gradient"] >= cfg.blowup_growth_factor * base)
        row["classification"] = "growing" if growing else "bounded"
    return rows


@dataclass
class SlabDescriptor:
    """Geometry of the mean convex slab between a lower minimal graph and a
    flat top slice: lower graph u_{-k}, top height alpha_top, lateral piece
    over the domain boundary spanning [min boundary value, alpha_top]."""

    k: float
    alpha_top: float
    psi_max: float
    lateral_span: tuple
    degenerate: bool


def build_slab(grid, profile, psi, k, alpha_top, cfg=None):
    """Solve with lowered data psi - k and describe the slab above the graph.

    Preconditions: k >= 0 and max(psi) <= alpha_top < A.  The degenerate
    case alpha_top == max(psi) (top touching the graph's highest boundary
    point) is accepted and flagged.
    """
    cfg = cfg or SolverConfig()
    if k < 0:
        raise ValueError("k must be nonnegative")
    psi_vals = boundary_values(grid, psi)
    top_psi = float(np.max(psi_vals))
    if not (top_psi <= alpha_top < profile.A):
        raise ValueError("need max(psi) <= alpha_top < A")
    u, rep = solve_dirichlet(grid, profile, psi_vals - k, cfg)
    if not rep.converged:
        raise SolveError("slab base solve failed", rep)
    lateral = (float(np.min(psi_vals)) - k, float(alpha_top))
    desc = SlabDescriptor(float(k), float(alpha_top), top_psi, lateral,
                          degenerate=(alpha_top == top_psi))
    return u, desc
