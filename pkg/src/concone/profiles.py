"""Conformal factors phi(r) on I = (-inf, A) and their growth conditions.

A profile carries phi together with its exact first and second derivatives
(symbolic when defined by an expression).  Built-ins:

  * product            phi = 1                     A = +inf
  * translating(a, n)  phi = exp(a r / n)          A = +inf
  * euclidean          phi = exp(r)                A = +inf
  * hyperbolic         phi = 2 e^r / (1 - e^{2r})  A = 0

The Euclidean model metric e^{2r}(sigma + dr^2) corresponds to the factor
phi = e^r (the metric carries phi^2); the hyperbolic model
4 e^{2r} / (1 - e^{2r})^2 (sigma + dr^2) likewise gives the factor above.

Warped-product coordinate convention: a cone metric ds^2 + m^2(s) sigma
maps to this form through r = integral ds / m(s), phi(r) = m(s(r)); growth
conditions on phi translate to m' > 0 (positivity), m' bounded (bounded
log-slope) and m'' >= 0 (log-convexity).

Condition checks are sampling-based heuristics with reported witnesses,
not proofs: the conditions quantify over an unbounded interval, so
built-ins carry their analytic certificates in the docs while arbitrary
expressions get an empirical verdict on the requested window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex

__all__ = [
    "ConformalProfile", "ConditionReport", "ProfileError",
    "product_profile", "translating_profile", "euclidean_profile",
    "hyperbolic_profile", "custom_profile",
    "check_cA", "check_cB", "check_cC", "extend_profile",
]

_GROWTH_THRESHOLD = 1e6


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionReport:
    holds: bool
    witness: float | None = None
    detail: dict = field(default_factory=dict)


class ConformalProfile:
    """phi(r) with exact derivatives on the working interval (-inf, A)."""

    def __init__(self, phi_fn, dphi_fn, d2phi_fn, A=math.inf, label="custom",
                 params=None, expr_text=None):
        self._phi = phi_fn
        self._dphi = dphi_fn
        self._d2phi = d2phi_fn
        self.A = float(A)
        self.label = label
        self.params = dict(params or {})
        self.expr_text = expr_text

    def __repr__(self):
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"ConformalProfile({self.label}{', ' + ps if ps else ''}, A={self.A})"

    def _check_window(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r >= self.A):
            raise ProfileError(f"argument at or beyond the upper endpoint A = {self.A}")
        return r

    def phi(self, r):
        return self._phi(self._check_window(r))

    def dphi(self, r):
        return self._dphi(self._check_window(r))

    def d2phi(self, r):
        return self._d2phi(self._check_window(r))

    def log_slope(self, r):
        """(log phi)'(r) = phi'/phi."""
        return self.dphi(r) / self.phi(r)

    def log_curv(self, r):
        """(log phi)''(r) = phi''/phi - (phi'/phi)^2."""
        p, dp, d2p = self.phi(r), self.dphi(r), self.d2phi(r)
        return d2p / p - (dp / p) ** 2

    # phi^n and its first two r-derivatives, used by the discrete energy
    def phin(self, r, n):
        return self.phi(r) ** n

    def dphin(self, r, n):
        return n * self.phi(r) ** (n - 1) * self.dphi(r)

    def d2phin(self, r, n):
        p, dp, d2p = self.phi(r), self.dphi(r), self.d2phi(r)
        return n * ((n - 1) * p ** (n - 2) * dp ** 2 + p ** (n - 1) * d2p)


def _from_expr(text, A, label, params=None):
    tree = ex.parse(text, allowed_vars=["r"])
    d1 = ex.differentiate(tree, "r")
    d2 = ex.differentiate(d1, "r")
    def mk(t):
        return lambda r: np.broadcast_to(np.asarray(ex.evaluate(t, {"r": r}), dtype=float),
                                         np.shape(r)).copy() if np.ndim(r) else float(ex.evaluate(t, {"r": r}))
    p = ConformalProfile(mk(tree), mk(d1), mk(d2), A, label, params, expr_text=text)
    p.expr = tree
    p.dexpr = d1
    p.d2expr = d2
    return p


def product_profile():
    return _from_expr("1.0", math.inf, "product")


def translating_profile(alpha, n):
    """phi = exp(alpha r / n); phi'/phi is identically alpha/n."""
    p = _from_expr(f"exp({alpha / n!r}*r)", math.inf, "translating",
                   {"alpha": float(alpha), "n": int(n)})
    rs = np.linspace(-5.0, 5.0, 10)
    if np.max(np.abs(p.log_slope(rs) - alpha / n)) > 1e-12:
        raise ProfileError("translating profile failed its log-slope identity")
    return p


def euclidean_profile():
    return _from_expr("exp(r)", math.inf, "euclidean")


def hyperbolic_profile():
    return _from_expr("2.0*exp(r)/(1.0-exp(2.0*r))", 0.0, "hyperbolic")


def custom_profile(text, A=math.inf):
    return _from_expr(text, A, "custom")


def _samples(lo, hi, count):
    if count < 2 or hi < lo:
        raise ProfileError("bad sampling window")
    return np.linspace(lo, hi, count)


def check_cA(p, window, a, samples=512):
    """Positivity of phi' on the window and bounded |phi'/phi| below `a`.

    Reports the empirical bound mu0 = max |phi'/phi| over samples <= a.
    The witness, when the check fails, is a violating r.
    """
    lo, hi = window
    if hi >= p.A or a >= p.A:
        raise ProfileError("window and split point must stay below A")
    rs = _samples(lo, hi, samples)
    dp = p.dphi(rs)
    bad = rs[dp <= 0]
    if bad.size:
        return ConditionReport(False, float(bad[0]), {"reason": "phi' <= 0"})
    rs_mu = _samples(lo, min(hi, a), samples)
    mu0 = float(np.max(np.abs(p.log_slope(rs_mu))))
    if not math.isfinite(mu0):
        return ConditionReport(False, float(rs_mu[np.argmax(np.abs(p.log_slope(rs_mu)))]),
                               {"reason": "phi'/phi unbounded"})
    return ConditionReport(True, None, {"mu0": mu0, "a": float(a)})


def check_cB(p, window, samples=512):
    """Log-convexity: (log phi)'' >= 0 (within -1e-12) at all samples."""
    rs = _samples(window[0], window[1], samples)
    lc = p.log_curv(rs)
    bad = rs[lc < -1e-12]
    if bad.size:
        i = int(np.argmin(lc))
        return ConditionReport(False, float(bad[0]), {"min_log_curv": float(lc[i])})
    return ConditionReport(True, None, {"min_log_curv": float(np.min(lc))})


def check_cC(p, window, samples=512, growth_threshold=_GROWTH_THRESHOLD):
    """Blow-up of phi at the finite endpoint A with log-slope bounded below.

    Heuristic: along samples approaching A the values of phi must increase
    monotonically beyond `growth_threshold`, and inf (log phi)' over the
    window must stay at some c > 0 (reported).  Requires finite A.
    """
    if not math.isfinite(p.A):
        raise ProfileError("condition cC requires a finite upper endpoint A")
    lo, hi = window
    if hi >= p.A:
        raise ProfileError("window must stay strictly below A")
    # log-spaced approach to A- to capture the blow-up
    gaps = np.geomspace(p.A - lo, p.A - hi, samples)
    rs = p.A - gaps
    vals = p.phi(rs)
    slopes = p.log_slope(rs)
    c = float(np.min(slopes))
    increasing = bool(np.all(np.diff(vals) > 0))
    blows_up = bool(vals[-1] >= growth_threshold)
    holds = increasing and blows_up and c > 0
    witness = None
    if not holds:
        if not increasing:
            witness = float(rs[np.argmin(np.diff(vals))])
        elif not blows_up:
            witness = float(rs[-1])
        else:
            witness = float(rs[np.argmin(slopes)])
    return ConditionReport(holds, witness,
                           {"c": c, "max_phi": float(vals[-1]),
                            "growth_threshold": growth_threshold})


class _ExtendedProfile(ConformalProfile):
    """Piecewise extension: phi below alpha0, C e^{beta r} above the midpoint,
    cubic Hermite blend of log phi in between (C^1, log-convex)."""

    def __init__(self, base, alpha0):
        if not math.isfinite(base.A):
            raise ProfileError("extension requires a finite upper endpoint A")
        if alpha0 >= base.A:
            raise ProfileError("alpha0 must lie below A")
        mid = 0.5 * (base.A + alpha0)
        # sup of phi'/phi over (-inf, mid]; sampled far to the left
        rs = np.linspace(mid - 60.0, mid, 4096)
        beta = float(np.max(base.log_slope(rs)))
        if beta <= 0:
            raise ProfileError("extension needs a positive log-slope (condition cA)")
        y0 = math.log(base.phi(alpha0))
        s0 = float(base.log_slope(alpha0))
        hhat = mid - alpha0
        y1 = y0 + 0.5 * hhat * (s0 + beta)   # convexity window midpoint
        self._base = base
        self._alpha0 = alpha0
        self._mid = mid
        self.beta = beta
        self.C = math.exp(y1 - beta * mid)
        # Hermite cubic in t = (r - alpha0)/hhat for log phi on the blend
        self._coef = (y0, s0 * hhat, 3 * (y1 - y0) - hhat * (2 * s0 + beta),
                      -2 * (y1 - y0) + hhat * (s0 + beta))
        super().__init__(None, None, None, A=math.inf,
                         label=f"extended({base.label})",
                         params={"alpha0": alpha0, "beta": beta, **base.params})
        chk = check_cB(self, (alpha0 - 5.0, mid + 5.0), 1024)
        if not chk.holds or chk.detail.get("min_log_curv", 0.0) < -1e-8:
            raise ProfileError("blend failed its log-convexity check")

    def _logphi_parts(self, r):
        r = np.asarray(r, dtype=float)
        t = (r - self._alpha0) / (self._mid - self._alpha0)
        a0, a1, a2, a3 = self._coef
        y = a0 + t * (a1 + t * (a2 + t * a3))
        dy = (a1 + t * (2 * a2 + 3 * t * a3)) / (self._mid - self._alpha0)
        d2y = (2 * a2 + 6 * t * a3) / (self._mid - self._alpha0) ** 2
        return y, dy, d2y

    def _eval(self, r, order):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        lo = r < self._alpha0
        hi = r >= self._mid
        bl = ~(lo | hi)
        if order == 0:
            if lo.any():
                out[lo] = self._base.phi(r[lo])
            out[hi] = self.C * np.exp(self.beta * r[hi])
            if bl.any():
                y, _, _ = self._logphi_parts(r[bl])
                out[bl] = np.exp(y)
        elif order == 1:
            if lo.any():
                out[lo] = self._base.dphi(r[lo])
            out[hi] = self.beta * self.C * np.exp(self.beta * r[hi])
            if bl.any():
                y, dy, _ = self._logphi_parts(r[bl])
                out[bl] = np.exp(y) * dy
        else:
            if lo.any():
                out[lo] = self._base.d2phi(r[lo])
            out[hi] = self.beta ** 2 * self.C * np.exp(self.beta * r[hi])
            if bl.any():
                y, dy, d2y = self._logphi_parts(r[bl])
                out[bl] = np.exp(y) * (d2y + dy * dy)
        return float(out[0]) if scalar else out

    def phi(self, r):
        return self._eval(r, 0)

    def dphi(self, r):
        return self._eval(r, 1)

    def d2phi(self, r):
        return self._eval(r, 2)


def extend_profile(p, alpha0):
    """Extend `p` past its finite endpoint to a profile defined on all of R.

    Below alpha0 the result equals the input exactly; above (A + alpha0)/2
    it is the pure exponential C e^{beta r} with beta the sampled sup of
    phi'/phi over (-inf, (A+alpha0)/2]; the middle third is a monotone C^1
    cubic blend of log phi chosen inside its convexity window.
    """
    return _ExtendedProfile(p, float(alpha0))
