"""Two-sided bounds for the Kobayashi metric and distance on convex domains.

Normalization: the unit disc has metric |v|/(1-|z|^2), so k_D(0;1) = 1
and K_D(0,t) = arctanh(t).

Upper bounds come from the largest affine disc in a given complex
direction (metric <= 1/line_distance); lower bounds from supporting
half-spaces, whose metric has the closed form |<v,a>|/(2(c - Re<z,a>)).
Both constructions are monotone under inclusion, so every reported
interval brackets the true value up to the phase-refinement allowance
``PHASE_EPS`` folded into the upper bound.

Distance bounds integrate the metric upper bound along the segment
(convexity keeps it inside) and project onto half-planes for the lower
side, where the hyperbolic distance is explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import ConvexDomain, line_distance_pairs, re_inner
from .nets import DirectionNet

__all__ = ["IntervalBound", "SupportingHalfspace", "halfspace_metric",
           "halfplane_distance", "kob_metric_bounds", "kob_metric_bounds_many",
           "kob_distance_bounds", "kob_distance_bounds_many", "kob_ball",
           "KobBallCloud"]

PHASE_EPS = 1e-12          # relative allowance for golden-section phase search
_SUPPORT_NET_SIZE = 512


@dataclass
class IntervalBound:
    """Certified enclosure [lower, upper] of a non-negative quantity."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError("lower bound must be non-negative")
        if self.lower > self.upper * (1 + 1e-12) + 1e-300:
            raise ValueError("empty interval")

    @property
    def ratio(self) -> float:
        """Diagnostic upper/(2*lower); 0.5 means the bracket is tight."""
        if self.lower == 0:
            return np.inf if self.upper > 0 else 1.0
        return self.upper / (2.0 * self.lower)

    def __contains__(self, x: float) -> bool:
        return self.lower <= x <= self.upper


@dataclass
class SupportingHalfspace:
    normal: np.ndarray
    offset: float
    contact: np.ndarray | None = None


def halfspace_metric(a, c: float, z, v) -> float:
    """Kobayashi metric of {Re<.,a> < c} at z in direction v."""
    a = np.asarray(a, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    margin = c - float(re_inner(z, a))
    if margin <= 0:
        raise ValueError("point outside the half-space")
    return float(np.abs(np.sum(v * np.conjugate(a)))) / (2.0 * margin)


def halfplane_distance(a, c: float, x, y) -> float:
    """Distance between images of x, y under z -> <z,a> in {Re w < c}."""
    a = np.asarray(a, dtype=np.complex128)
    wx = complex(np.sum(np.asarray(x, dtype=np.complex128) * np.conjugate(a)))
    wy = complex(np.sum(np.asarray(y, dtype=np.complex128) * np.conjugate(a)))
    mx = c - wx.real
    my = c - wy.real
    if mx <= 0 or my <= 0:
        raise ValueError("point outside the half-space")
    arg = 1.0 + abs(wx - wy) ** 2 / (2.0 * mx * my)
    return 0.5 * float(np.arccosh(arg))


# ----------------------------------------------------------------------
# supporting half-space candidates
# ----------------------------------------------------------------------
def _support_exact(domain: ConvexDomain) -> bool:
    fam = getattr(domain, "family", "custom")
    if fam == "transformed":
        return _support_exact(domain.base)
    return fam in ("ball", "egg", "halfspaces", "siegel")


def _support_candidates(domain: ConvexDomain, n: int = _SUPPORT_NET_SIZE):
    """Cached (normals, offsets) of supporting half-spaces from a net."""
    cache = getattr(domain, "_kob_support_cache", None)
    if cache is not None and cache[0] == n:
        return cache[1], cache[2]
    net = DirectionNet.standard(domain.dim, n)
    h = domain.support_many(net.directions)
    finite = np.isfinite(h)
    A = net.directions[finite]
    C = h[finite]
    if not _support_exact(domain):
        C = C + 1e-9 * (1.0 + np.abs(C))
    domain._kob_support_cache = (n, A, C)
    return A, C


def _contact_candidates(domain: ConvexDomain, z, n: int = 64):
    """Half-spaces from boundary contacts along coarse rays (needs a
    defining polynomial for the normals)."""
    if domain.defining_poly is None:
        return None
    net = DirectionNet.standard(domain.dim, n)
    rays = domain.ray_many(z, net.directions)
    finite = np.isfinite(rays)
    if not finite.any():
        return None
    pts = np.asarray(z, np.complex128)[None, :] + rays[finite, None] * net.directions[finite]
    grads = np.array([domain.defining_poly.dz(j).eval(pts) for j in range(domain.dim)]).T
    A = np.conjugate(2.0 * grads)
    norms = np.linalg.norm(A, axis=1)
    ok = norms > 1e-12
    A = A[ok] / norms[ok][:, None]
    C = re_inner(pts[ok], A)
    return A, C


# ----------------------------------------------------------------------
# metric bounds
# ----------------------------------------------------------------------
def kob_metric_bounds_many(domain: ConvexDomain, Z, V,
                           n_phases: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (lower, upper) metric bounds for paired rows (Z_i, V_i)."""
    Z = np.asarray(Z, dtype=np.complex128)
    V = np.asarray(V, dtype=np.complex128)
    delta = line_distance_pairs(domain, Z, V, n_phases=n_phases)
    with np.errstate(divide="ignore"):
        upper = np.where(np.isinf(delta), 0.0, (1.0 / delta) * (1.0 + PHASE_EPS))
    A, C = _support_candidates(domain)
    nums = np.abs(V @ np.conjugate(A.T))                    # (n, m)
    margins = C[None, :] - np.real(Z @ np.conjugate(A.T))   # (n, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(margins > 0, nums / (2.0 * margins), 0.0)
    lower = np.max(vals, axis=1) if vals.size else np.zeros(len(Z))
    lower = np.where(upper == 0.0, 0.0, np.minimum(lower, upper))
    return lower, upper


def _refine_lower(domain: ConvexDomain, z, v, seed_normals, lower0: float) -> float:
    """Local ascent of the half-space bound over the normal direction."""
    from scipy.optimize import minimize

    d = domain.dim
    best = lower0

    def neg(x):
        u = x[:d] + 1j * x[d:]
        nu = np.linalg.norm(u)
        if nu < 1e-12:
            return 0.0
        u = u / nu
        h = domain.support_many(u[None, :])[0]
        if not np.isfinite(h):
            return 0.0
        margin = h - float(re_inner(z, u))
        if margin <= 0:
            return 0.0
        return -float(np.abs(np.sum(v * np.conjugate(u)))) / (2.0 * margin)

    for u0 in seed_normals:
        x0 = np.concatenate([u0.real, u0.imag])
        res = minimize(neg, x0, method="Powell",
                       options={"xtol": 1e-12, "ftol": 1e-14, "maxiter": 800})
        best = max(best, -float(res.fun))
    return best


def kob_metric_bounds(domain: ConvexDomain, z, v, refine: bool = True,
                      n_phases: int = 256) -> IntervalBound:
    """Certified bracket for the infinitesimal metric k(z; v).

    Upper: reciprocal of the largest affine disc radius in direction v.
    Lower: best supporting half-space from the swept net, boundary-contact
    normals, and (optionally) local ascent over the normal direction.
    A direction along a contained complex line yields [0, 0].
    """
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if np.linalg.norm(v) == 0:
        raise ValueError("direction must be nonzero")
    if not domain.contains(z):
        raise ValueError("basepoint outside domain")
    lower, upper = kob_metric_bounds_many(domain, z[None, :], v[None, :],
                                          n_phases=n_phases)
    lower, upper = float(lower[0]), float(upper[0])
    if upper == 0.0:
        return IntervalBound(0.0, 0.0)
    contacts = _contact_candidates(domain, z)
    seeds = []
    if contacts is not None:
        A, C = contacts
        nums = np.abs(A @ np.conjugate(v))
        margins = C - re_inner(np.broadcast_to(z, A.shape), A)
        good = margins > 0
        if good.any():
            vals = np.where(good, nums / (2.0 * margins), 0.0)
            lower = max(lower, float(np.max(vals)))
            seeds.append(A[int(np.argmax(vals))])
    if refine:
        As, Cs = _support_candidates(domain)
        nums = np.abs(As @ np.conjugate(v))
        margins = Cs - re_inner(np.broadcast_to(z, As.shape), As)
        vals = np.where(margins > 0, nums / (2.0 * margins), 0.0)
        top = np.argsort(vals)[::-1][:3]
        seeds.extend(As[i] for i in top)
        lower = _refine_lower(domain, z, v, seeds, lower)
    return IntervalBound(min(lower, upper), upper)


# ----------------------------------------------------------------------
# distance bounds
# ----------------------------------------------------------------------
def _segment_metric_upper(domain: ConvexDomain, X, Y, ts,
                          n_phases: int) -> np.ndarray:
    """Metric upper bound at X + t(Y-X) (per pair, per node); shape (n, len(ts))."""
    X = np.asarray(X, np.complex128)
    Y = np.asarray(Y, np.complex128)
    n = len(X)
    m = len(ts)
    W = Y - X
    Zs = (X[:, None, :] + ts[None, :, None] * W[:, None, :]).reshape(n * m, -1)
    Vs = np.broadcast_to(W[:, None, :], (n, m, X.shape[1])).reshape(n * m, -1)
    delta = np.empty(n * m)
    chunk = max(1, (2 ** 21) // n_phases)
    for s in range(0, n * m, chunk):
        delta[s:s + chunk] = line_distance_pairs(
            domain, Zs[s:s + chunk], Vs[s:s + chunk], n_phases=n_phases)
    with np.errstate(divide="ignore"):
        k = np.where(np.isinf(delta), 0.0, (1.0 / delta) * (1.0 + PHASE_EPS))
    return k.reshape(n, m)


def _composite_simpson(vals: np.ndarray) -> np.ndarray:
    """Simpson rule over [0,1] from values at odd+1 equispaced nodes."""
    m = vals.shape[-1]
    h = 1.0 / (m - 1)
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return (h / 3.0) * (vals @ w)


def kob_distance_bounds_many(domain: ConvexDomain, X, Y, rel_tol: float = 1e-6,
                             max_nodes: int = 2 ** 14,
                             n_phases: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (lower, upper) distance bounds for paired rows (X_i, Y_i)."""
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    n = len(X)
    same = np.all(np.isclose(X, Y, rtol=0, atol=0), axis=1)
    # lower: best half-plane projection
    A, C = _support_candidates(domain)
    wx = X @ np.conjugate(A.T)
    wy = Y @ np.conjugate(A.T)
    mx = C[None, :] - wx.real
    my = C[None, :] - wy.real
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = 1.0 + np.abs(wx - wy) ** 2 / (2.0 * mx * my)
        dv = np.where((mx > 0) & (my > 0), 0.5 * np.arccosh(np.maximum(arg, 1.0)), 0.0)
    lower = np.max(dv, axis=1) if dv.size else np.zeros(n)
    # upper: composite Simpson with per-pair refinement
    upper = np.full(n, np.nan)
    active = ~same
    prev = None
    m = 17
    while active.any():
        ts = np.linspace(0.0, 1.0, m)
        vals = _segment_metric_upper(domain, X[active], Y[active], ts, n_phases)
        est = _composite_simpson(vals)  # in t-parameter; metric already includes |W|
        if prev is not None:
            done = np.abs(est - prev) <= rel_tol * np.maximum(np.abs(est), 1e-30)
        else:
            done = np.zeros(len(est), dtype=bool)
        if m >= max_nodes:
            done[:] = True
        idx = np.where(active)[0]
        upper[idx[done]] = est[done]
        new_active = np.zeros(n, dtype=bool)
        new_active[idx[~done]] = True
        prev = est[~done]
        active = new_active
        m = 2 * (m - 1) + 1
    upper[same] = 0.0
    lower[same] = 0.0
    upper = np.maximum(upper, lower)   # quadrature tolerance guard
    return lower, upper


def kob_distance_bounds(domain: ConvexDomain, x, y, refine: bool = True,
                        rel_tol: float = 1e-6) -> IntervalBound:
    """Certified bracket for the Kobayashi distance K(x, y)."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    for p in (x, y):
        if not domain.contains(p):
            raise ValueError("point outside domain")
    lower, upper = kob_distance_bounds_many(domain, x[None, :], y[None, :],
                                            rel_tol=rel_tol)
    lower, upper = float(lower[0]), float(upper[0])
    if refine and upper > 0:
        from scipy.optimize import minimize
        d = domain.dim
        A, C = _support_candidates(domain)

        def neg(t):
            u = t[:d] + 1j * t[d:]
            nu = np.linalg.norm(u)
            if nu < 1e-12:
                return 0.0
            u = u / nu
            h = domain.support_many(u[None, :])[0]
            if not np.isfinite(h):
                return 0.0
            mx = h - float(re_inner(x, u))
            my = h - float(re_inner(y, u))
            if mx <= 0 or my <= 0:
                return 0.0
            wx = complex(np.sum(x * np.conjugate(u)))
            wy = complex(np.sum(y * np.conjugate(u)))
            return -0.5 * np.arccosh(1.0 + abs(wx - wy) ** 2 / (2.0 * mx * my))

        wx = x @ np.conjugate(A.T)
        wy = y @ np.conjugate(A.T)
        mx = C - wx.real
        my = C - wy.real
        with np.errstate(invalid="ignore"):
            arg = 1.0 + np.abs(wx - wy) ** 2 / (2.0 * mx * my)
            dv = np.where((mx > 0) & (my > 0), np.arccosh(np.maximum(arg, 1.0)), 0.0)
        for i in np.argsort(dv)[::-1][:3]:
            res = minimize(neg, np.concatenate([A[i].real, A[i].imag]),
                           method="Powell",
                           options={"xtol": 1e-12, "ftol": 1e-14, "maxiter": 800})
            lower = max(lower, -float(res.fun))
    return IntervalBound(min(lower, upper), upper)


# ----------------------------------------------------------------------
# Kobayashi balls
# ----------------------------------------------------------------------
@dataclass
class KobBallCloud:
    center: np.ndarray
    radius: float
    points: np.ndarray          # (n, d)
    tags: np.ndarray            # 'inner' / 'outer' / 'unknown'

    @property
    def inner(self) -> np.ndarray:
        return self.points[self.tags == "inner"]

    @property
    def outer(self) -> np.ndarray:
        return self.points[self.tags == "outer"]


def kob_ball(domain: ConvexDomain, x, r: float, n_samples: int = 256,
             seed: int = 0) -> KobBallCloud:
    """Sampled enclosure of the closed Kobayashi ball of radius r about x.

    Points whose distance upper bound is <= r are tagged inner (certainly
    in the ball); points whose lower bound exceeds r are tagged outer.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    d = domain.dim
    n_dirs = max(8, n_samples // 8)
    dirs = rng.standard_normal((n_dirs, d)) + 1j * rng.standard_normal((n_dirs, d))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    reach = domain.ray_many(x, dirs)
    cap = 1.0 + float(np.linalg.norm(x))
    reach = np.where(np.isfinite(reach), reach, cap)
    fracs = 1.0 - np.exp(-2.0 * r * np.linspace(0.125, 1.0, 8))
    pts = (x[None, None, :] +
           (reach[:, None] * fracs[None, :])[:, :, None] * dirs[:, None, :])
    pts = pts.reshape(-1, d)
    pts = np.concatenate([x[None, :], pts], axis=0)
    lo, up = kob_distance_bounds_many(domain, np.broadcast_to(x, pts.shape), pts)
    tags = np.where(up <= r, "inner", np.where(lo > r, "outer", "unknown"))
    return KobBallCloud(center=x, radius=r, points=pts, tags=tags.astype(object))
