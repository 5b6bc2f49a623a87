"""Squeezing-function bounds from affine maps and indicatrix sandwiches.

Lower bounds: an affine map A sends the domain into the ball rho*B of
its circumradius; composing with the ball automorphism that centers
A(x) gives an injective holomorphic competitor, whose image certainly
contains the ball of radius inf over the boundary of the centered
image.  For affine images of balls this recovers exactly 1 at every
basepoint.

Upper bounds: the derivative of any extremal competitor sandwiches the
Kobayashi indicatrix between balls, so the best Hermitian ball-sandwich
ratio of the outer indicatrix body (with the inner body capping the
circumradius, which keeps the bound valid without the outer/inner
inflation factor) dominates the squeezing value.  The bound is clamped
to 1 and is often slack for round indicatrices; the gap experiments
therefore report it alongside the curvature pinch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domains import (AffineMap, Ball, ConvexDomain, PointedDomain,
                      TransformedDomain, apply_affine, re_inner)
from .nets import DirectionNet

__all__ = ["SqueezeBound", "IndicatrixApprox", "squeeze_lower", "indicatrix",
           "squeeze_upper", "squeeze_bounds", "semicontinuity_check",
           "ball_sandwich_ratio", "inscribed_ellipsoid"]


@dataclass
class SqueezeBound:
    lower: float
    upper: float
    lower_witness: Optional[AffineMap] = None
    upper_witness: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper <= 1.0 + 1e-12):
            raise ValueError("bounds must satisfy 0 < lower <= upper <= 1")


@dataclass
class IndicatrixApprox:
    directions: np.ndarray
    inner_radii: np.ndarray       # 1 / metric upper bound
    outer_radii: np.ndarray       # 1 / metric lower bound
    mesh: float

    def __post_init__(self):
        if np.any(self.inner_radii > self.outer_radii * (1 + 1e-9)):
            raise ValueError("inner body must sit inside the outer body")


# ----------------------------------------------------------------------
# inscribed ellipsoids (seeds for the affine search)
# ----------------------------------------------------------------------
def inscribed_ellipsoid(domain: ConvexDomain, net: DirectionNet | None = None,
                        seed: int = 0):
    """Approximate maximum-volume inscribed ellipsoid (center, matrix).

    Exact for affine images of balls; otherwise a penalty search over the
    Hermitian factor and center against net support values.
    """
    if isinstance(domain, Ball):
        return domain.center.copy(), domain.radius * np.eye(domain.dim,
                                                            dtype=np.complex128)
    if isinstance(domain, TransformedDomain) and isinstance(domain.base, Ball):
        L = domain.map.linear * domain.base.radius
        c = domain.map(domain.base.center)
        return c, L
    from scipy.optimize import minimize

    d = domain.dim
    if net is None:
        net = DirectionNet.standard(d, 512, seed=seed)
    h = domain.support_many(net.directions)
    if not np.all(np.isfinite(h)):
        raise ValueError("inscribed ellipsoid needs a bounded domain")

    z0 = domain.interior_point()
    r0 = float(np.min(h - re_inner(np.broadcast_to(z0, net.directions.shape),
                                   net.directions)))

    def unpack(x):
        b = x[:d] + 1j * x[d:2 * d]
        S = _sym_from_params(x[2 * d:], d)
        return b, S

    def neg(x):
        b, S = unpack(x)
        evals, V = np.linalg.eigh(S)
        H = (V * np.exp(evals)) @ np.conjugate(V.T)
        supp = re_inner(np.broadcast_to(b, net.directions.shape), net.directions) \
            + np.linalg.norm(net.directions @ np.conjugate(H.T), axis=1)
        viol = np.maximum(supp - h, 0.0)
        return -float(np.sum(evals)) + 1e4 * float(np.sum(viol ** 2))

    x0 = np.zeros(2 * d + d * d)
    x0[:d] = z0.real
    x0[d:2 * d] = z0.imag
    x0[2 * d:2 * d + d] = np.log(max(r0, 1e-6))
    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
    b, S = unpack(res.x)
    evals, V = np.linalg.eigh(S)
    H = (V * np.exp(evals)) @ np.conjugate(V.T)
    return b, H


def _sym_from_params(x, d):
    """Hermitian matrix from d^2 real parameters."""
    S = np.zeros((d, d), dtype=np.complex128)
    idx = 0
    for i in range(d):
        S[i, i] = x[idx]
        idx += 1
    for i in range(d):
        for j in range(i + 1, d):
            S[i, j] = x[idx] + 1j * x[idx + 1]
            S[j, i] = x[idx] - 1j * x[idx + 1]
            idx += 2
    return S


def _params_from_sym(S, d):
    x = []
    for i in range(d):
        x.append(S[i, i].real)
    for i in range(d):
        for j in range(i + 1, d):
            x.append(S[i, j].real)
            x.append(S[i, j].imag)
    return np.array(x)


# ----------------------------------------------------------------------
# lower bound
# ----------------------------------------------------------------------
def _certified_value(domain: ConvexDomain, x, A: AffineMap,
                     net: DirectionNet, descend: bool = True) -> float:
    """Centered-image inradius of A(domain) after ball re-centering.

    rho是 the circumradius of A(domain); the competitor is the ball
    automorphism moving A(x)/rho to 0 composed with A/rho, and the value
    is the infimum of the centered boundary norm.
    """
    from scipy.optimize import minimize

    img = apply_affine(A, domain)
    h = img.support_many(net.directions)
    if not np.all(np.isfinite(h)):
        return 0.0
    rho = float(np.max(h))
    if descend:
        rho = _refine_circumradius(img, net, rho)
    else:
        rho *= 1.0 + 0.5 * net.mesh ** 2   # conservative cover for the net gap
    rho *= 1.0 + 1e-12
    c = A(np.asarray(x, np.complex128)) / rho
    if np.linalg.norm(c) >= 1.0:
        return 0.0
    z0 = img.interior_point()
    rays = img.ray_many(z0, net.directions)
    pts = (z0[None, :] + rays[:, None] * net.directions) / rho
    vals = _mobius_norm(pts, c)
    i0 = int(np.argmin(vals))
    best = float(vals[i0])
    if descend:
        d = domain.dim

        def obj(t):
            u = t[:d] + 1j * t[d:]
            nu = np.linalg.norm(u)
            if nu < 1e-12:
                return 1e18
            u = u / nu
            r = img.ray_many(z0, u[None, :])[0]
            if not np.isfinite(r):
                return 1e18
            p = (z0 + r * u) / rho
            return float(_mobius_norm(p[None, :], c)[0])

        u0 = net.directions[i0]
        res = minimize(obj, np.concatenate([u0.real, u0.imag]), method="Powell",
                       options={"xtol": 1e-10, "ftol": 1e-12, "maxfev": 400})
        best = min(best, float(res.fun))
    return max(best - 1e-9, 0.0)


def _refine_circumradius(domain: ConvexDomain, net: DirectionNet,
                         rho0: float) -> float:
    from scipy.optimize import minimize

    h = domain.support_many(net.directions)
    i0 = int(np.argmax(h))
    d = domain.dim

    def neg(t):
        u = t[:d] + 1j * t[d:]
        nu = np.linalg.norm(u)
        if nu < 1e-12:
            return 1e18
        u = u / nu
        val = domain.support_many(u[None, :])[0]
        return -val if np.isfinite(val) else 1e18

    u0 = net.directions[i0]
    res = minimize(neg, np.concatenate([u0.real, u0.imag]), method="Powell",
                   options={"xtol": 1e-10, "ftol": 1e-12, "maxfev": 300})
    return max(rho0, -float(res.fun))


def _mobius_norm(pts: np.ndarray, c: np.ndarray) -> np.ndarray:
    """|phi_c(p)| for the ball automorphism phi_c with phi_c(c) = 0."""
    c2 = float(np.sum(np.abs(c) ** 2))
    if c2 < 1e-30:
        return np.linalg.norm(pts, axis=1)
    s = np.sqrt(1.0 - c2)
    ip = pts @ np.conjugate(c)          # <p, c>
    Pc = (ip / c2)[:, None] * c[None, :]
    Qc = pts - Pc
    num = c[None, :] - Pc - s * Qc
    den = 1.0 - ip
    return np.linalg.norm(num, axis=1) / np.abs(den)


def squeeze_lower(p: PointedDomain, net: DirectionNet | None = None,
                  refine: bool = True, n_restarts: int = 1,
                  seed: int = 0) -> tuple[float, AffineMap]:
    """Certified lower bound for the squeezing function at the basepoint.

    Candidates: the inscribed-ellipsoid map (exact for ellipsoids), the
    orthogonal-contact normalization, and a Hermitian refinement around
    the best seed; each candidate is scored by the re-centered inradius
    of its image in the circumscribed ball.  The refinement loop scores
    on a coarse net and only the winner is re-certified on the full net.
    """
    from scipy.optimize import minimize
    from .rescale import frankel_normalize

    domain, x = p.domain, p.basepoint
    d = domain.dim
    if net is None:
        net = DirectionNet.standard(d, 1024, seed=seed)
    candidates: list[AffineMap] = []
    try:
        c, H = inscribed_ellipsoid(domain)
        L = np.linalg.inv(H)
        candidates.append(AffineMap(L, -L @ c))
    except Exception:
        pass
    try:
        candidates.append(frankel_normalize(p).map)
    except Exception:
        pass
    candidates.append(AffineMap.translation_by(-x))
    scored = [(_certified_value(domain, x, A, net, descend=True), A)
              for A in candidates]
    best, bestA = max(scored, key=lambda t: t[0])
    if refine and best < 1.0 - 1e-9:
        baseA = bestA
        coarse = DirectionNet.standard(d, 192, seed=seed + 1)

        def neg(t):
            S = _sym_from_params(t, d)
            evals, V = np.linalg.eigh(S)
            H = (V * np.exp(evals)) @ np.conjugate(V.T)
            A = AffineMap(H @ baseA.linear, H @ baseA.translation)
            return -_certified_value(domain, x, A, coarse, descend=False)

        rng = np.random.default_rng(seed)
        starts = [np.zeros(d * d)]
        for _ in range(n_restarts - 1):
            starts.append(0.2 * rng.standard_normal(d * d))
        for s0 in starts:
            res = minimize(neg, s0, method="Powell",
                           options={"xtol": 1e-8, "ftol": 1e-10, "maxfev": 120})
            S = _sym_from_params(res.x, d)
            evals, V = np.linalg.eigh(S)
            H = (V * np.exp(evals)) @ np.conjugate(V.T)
            A = AffineMap(H @ baseA.linear, H @ baseA.translation)
            val = _certified_value(domain, x, A, net, descend=True)
            if val > best:
                best, bestA = val, A
    return min(best, 1.0), bestA


# ----------------------------------------------------------------------
# indicatrix and upper bound
# ----------------------------------------------------------------------
def indicatrix(p: PointedDomain, net: DirectionNet | None = None,
               seed: int = 0) -> IndicatrixApprox:
    """Inner/outer circled bodies around the Kobayashi unit ball at x."""
    from .kobayashi import kob_metric_bounds_many

    domain, x = p.domain, p.basepoint
    if net is None:
        net = DirectionNet.standard(domain.dim, 256, seed=seed)
    Z = np.broadcast_to(x, net.directions.shape)
    lo, up = kob_metric_bounds_many(domain, Z, net.directions)
    if np.any(up == 0.0) or np.any(lo == 0.0):
        raise ValueError("degenerate metric direction; indicatrix unbounded")
    return IndicatrixApprox(directions=net.directions.copy(),
                            inner_radii=1.0 / up, outer_radii=1.0 / lo,
                            mesh=net.mesh)


def ball_sandwich_ratio(gen_outer: np.ndarray, gen_inner: np.ndarray | None = None,
                        w_net: DirectionNet | None = None, n_restarts: int = 32,
                        n_iters: int = 500, seed: int = 0,
                        refine: bool = True) -> tuple[float, np.ndarray]:
    """max over Hermitian positive T of inradius(T K_out) / max over
    circumradius cap circ(T K_in) = 1.

    The bodies are circled hulls of the generator points: support in
    direction w is max_i |<g_i, w>| and the circumradius is the largest
    generator norm (exact for the hull).  The inradius is a direction-net
    minimum of the support, refined by local descent for the winning T so
    the net resolution drops out of the reported value.
    """
    from scipy.optimize import minimize

    d = gen_outer.shape[1]
    if gen_inner is None:
        gen_inner = gen_outer
    if w_net is None:
        w_net = DirectionNet.standard(d, 512, seed=seed)
    W = w_net.directions

    def scaled(T):
        circ = float(np.max(np.linalg.norm(gen_inner @ T.T, axis=1)))
        if circ <= 0:
            return 0.0, T
        return 1.0 / circ, T / circ

    def inradius_net(T):
        supp = np.abs((gen_outer @ T.T) @ np.conjugate(W.T))
        return float(np.min(np.max(supp, axis=0)))

    def neg(x):
        S = _sym_from_params(x, d)
        evals, V = np.linalg.eigh(S)
        T = (V * np.exp(evals)) @ np.conjugate(V.T)
        s, Tn = scaled(T)
        if s == 0.0:
            return 0.0
        return -inradius_net(Tn)

    rng = np.random.default_rng(seed)
    best = -np.inf
    best_x = np.zeros(d * d)
    starts = [np.zeros(d * d)]
    for _ in range(n_restarts - 1):
        starts.append(0.7 * rng.standard_normal(d * d))
    for x0 in starts:
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"maxiter": n_iters, "xatol": 1e-9, "fatol": 1e-11})
        if -res.fun > best:
            best = -float(res.fun)
            best_x = res.x
    S = _sym_from_params(best_x, d)
    evals, V = np.linalg.eigh(S)
    bestT = scaled((V * np.exp(evals)) @ np.conjugate(V.T))[1]
    if refine:
        # kill the w-net error: descend the support of the winning body
        GT = gen_outer @ bestT.T

        def obj(t):
            w = t[:d] + 1j * t[d:]
            nw = np.linalg.norm(w)
            if nw < 1e-12:
                return 1e18
            w = w / nw
            return float(np.max(np.abs(GT @ np.conjugate(w))))

        supp = np.abs(GT @ np.conjugate(W.T))
        i0 = int(np.argmin(np.max(supp, axis=0)))
        w0 = W[i0]
        res = minimize(obj, np.concatenate([w0.real, w0.imag]), method="Powell",
                       options={"xtol": 1e-11, "ftol": 1e-13, "maxfev": 500})
        best = min(best, float(res.fun))
    return float(best), bestT


def squeeze_upper(p: PointedDomain, ind: IndicatrixApprox | None = None,
                  n_restarts: int = 32, seed: int = 0) -> tuple[float, np.ndarray]:
    """Upper bound via the best Hermitian ball sandwich of the indicatrix.

    The inradius is taken on the outer body and the circumradius cap on
    the inner body, so the optimum dominates the true sandwich value of
    the indicatrix itself.  Clamped to 1; optimizer failure returns the
    vacuous bound 1.
    """
    if ind is None:
        ind = indicatrix(p, seed=seed)
    gen_outer = ind.outer_radii[:, None] * ind.directions
    gen_inner = ind.inner_radii[:, None] * ind.directions
    try:
        val, T = ball_sandwich_ratio(gen_outer, gen_inner,
                                     n_restarts=n_restarts, seed=seed)
    except Exception:
        return 1.0, np.eye(ind.directions.shape[1], dtype=np.complex128)
    # hull-vs-body sampling slack errs the bound upward
    slack = 0.5 * ind.mesh * max(val, 1e-6)
    return float(min(1.0, val + slack)), T


def squeeze_bounds(p: PointedDomain, seed: int = 0,
                   refine: bool = True, n_restarts: int = 8) -> SqueezeBound:
    lo, A = squeeze_lower(p, refine=refine, seed=seed)
    up, T = squeeze_upper(p, n_restarts=n_restarts, seed=seed)
    up = max(up, lo)
    return SqueezeBound(lower=max(lo, 1e-12), upper=min(up, 1.0),
                        lower_witness=A, upper_witness=T)


# ----------------------------------------------------------------------
# semicontinuity
# ----------------------------------------------------------------------
def semicontinuity_check(sequence: list[PointedDomain], limit: PointedDomain,
                         radii, conv_tol: float, bound_tol: float = 1e-3,
                         seed: int = 0) -> dict:
    """limsup of lower bounds along the sequence <= upper bound at the limit.

    The domain convergence precondition is validated first through the
    local Hausdorff report.
    """
    from .hausdorff import check_convergence

    rep = check_convergence([q.domain for q in sequence], limit.domain,
                            radii, conv_tol)
    if not rep.verdict:
        raise ValueError("sequence does not converge to the limit domain")
    lowers = [squeeze_lower(q, refine=True, seed=seed)[0] for q in sequence]
    up, _ = squeeze_upper(limit, seed=seed)
    tail = max(lowers[len(lowers) // 2:])
    return {
        "lowers": lowers,
        "limit_upper": up,
        "passed": tail <= up + bound_tol,
        "convergence": rep,
    }
