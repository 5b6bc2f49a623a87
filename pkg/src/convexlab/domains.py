"""Convex domains in C^d presented through oracles.

Every domain exposes membership, ray distances ``sup{t>0 : z+t*u in D}``
(the parameter ``t`` is measured against the direction vector ``u``, so
for unit ``u`` it is the Euclidean distance to the boundary along the
ray), and a support function ``h(u) = sup_z Re<z,u>``.  Convexity enters
all downstream algorithms only through these three maps plus optional
polynomial defining data, so bodies never need to be meshed.

Directions and normals are complex vectors; the real pairing used
throughout is ``<z,u>_R = Re(sum z_j conj(u_j))``.

Rays past ``HORIZON`` are reported as ``inf`` (model domains of the
blow-up analysis are unbounded).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .exactpoly import QC, ZPoly

HORIZON = 1.0e6
INTERIOR_EPS = 1.0e-12

__all__ = [
    "AffineMap", "ConvexDomain", "PointedDomain", "Ball", "Egg", "Polydisc",
    "HalfspaceIntersection", "PolynomialModel", "SiegelDomain",
    "CustomDomain", "TransformedDomain", "ellipsoid", "apply_affine",
    "line_distance", "line_distance_pairs", "boundary_project", "contains_affine_line",
    "domain_from_descriptor", "herm", "re_inner", "HORIZON",
]


def herm(v, w) -> complex:
    """Hermitian inner product sum v_j * conj(w_j)."""
    return complex(np.sum(np.asarray(v) * np.conjugate(np.asarray(w))))


def re_inner(v, w):
    """Real pairing Re<v,w>; broadcasts over leading axes of v."""
    v = np.asarray(v)
    w = np.asarray(w)
    return np.real(np.sum(v * np.conjugate(w), axis=-1))


# ----------------------------------------------------------------------
# affine maps
# ----------------------------------------------------------------------
@dataclass
class AffineMap:
    """Invertible complex-affine map z -> L z + b."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=np.complex128)
        self.translation = np.asarray(self.translation, dtype=np.complex128)
        self._inv_linear = np.linalg.inv(self.linear)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.linear))

    @staticmethod
    def identity(d: int) -> "AffineMap":
        return AffineMap(np.eye(d, dtype=np.complex128), np.zeros(d, dtype=np.complex128))

    @staticmethod
    def translation_by(b) -> "AffineMap":
        b = np.asarray(b, dtype=np.complex128)
        return AffineMap(np.eye(len(b), dtype=np.complex128), b)

    @staticmethod
    def linear_map(L) -> "AffineMap":
        L = np.asarray(L, dtype=np.complex128)
        return AffineMap(L, np.zeros(L.shape[0], dtype=np.complex128))

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return z @ self.linear.T + self.translation

    def apply_vector(self, v):
        return np.asarray(v, dtype=np.complex128) @ self.linear.T

    def inverse(self) -> "AffineMap":
        return AffineMap(self._inv_linear, -self._inv_linear @ self.translation)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: z -> self(other(z))."""
        return AffineMap(self.linear @ other.linear,
                         self.linear @ other.translation + self.translation)


# ----------------------------------------------------------------------
# oracle base class
# ----------------------------------------------------------------------
class ConvexDomain:
    """Oracle presentation of an open convex set in C^d."""

    family: str = "custom"

    def __init__(self, dim: int):
        self.dim = dim
        self.defining_poly: Optional[ZPoly] = None   # float coefficients
        self.exact_poly: Optional[ZPoly] = None      # QC coefficients when available

    # -- membership ----------------------------------------------------
    def contains_many(self, Z) -> np.ndarray:
        raise NotImplementedError

    def contains(self, z) -> bool:
        z = np.asarray(z, dtype=np.complex128)
        if not np.all(np.isfinite(z.view(np.float64))):
            return False
        return bool(self.contains_many(z[None, :])[0])

    # -- rays ------------------------------------------------------------
    def ray_pairs(self, Z, U) -> np.ndarray:
        """sup{t>0 : Z_i + t*U_i in domain} per paired row (inf past HORIZON)."""
        return self._ray_bisect(Z, U)

    def ray_many(self, z, U) -> np.ndarray:
        """Rays from a single basepoint along the rows of U."""
        U = np.asarray(U, dtype=np.complex128)
        Z = np.broadcast_to(np.asarray(z, dtype=np.complex128), U.shape)
        return self.ray_pairs(Z, U)

    def ray(self, z, u) -> float:
        return float(self.ray_many(z, np.asarray(u, dtype=np.complex128)[None, :])[0])

    def _ray_bisect(self, Z, U) -> np.ndarray:
        """Generic monotone bisection on the membership oracle."""
        Z = np.asarray(Z, dtype=np.complex128)
        U = np.asarray(U, dtype=np.complex128)
        n = U.shape[0]
        lo = np.zeros(n)
        hi = np.full(n, 1e-3)
        # exponential growth until outside or past horizon
        for _ in range(64):
            inside = self.contains_many(Z + hi[:, None] * U)
            grow = inside & (hi <= HORIZON)
            if not grow.any():
                break
            lo = np.where(inside, hi, lo)
            hi = np.where(grow, hi * 2.0, hi)
        unbounded = hi > HORIZON
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            inside = self.contains_many(Z + mid[:, None] * U)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        out = 0.5 * (lo + hi)
        out[unbounded] = np.inf
        return out

    # -- support ---------------------------------------------------------
    def support_many(self, U) -> np.ndarray:
        """h(u) = sup Re<z,u> per row; generic radial fallback."""
        return self._support_fallback(np.asarray(U, dtype=np.complex128))

    def _support_fallback(self, U) -> np.ndarray:
        # maximize Re<z,u> over boundary points sampled radially from the
        # interior point; refined per direction by local ascent.
        from .nets import DirectionNet
        from scipy.optimize import minimize

        z0 = self.interior_point()
        net = DirectionNet.standard(self.dim, 512)
        rays = self.ray_many(z0, net.directions)
        finite = np.isfinite(rays)
        pts = z0[None, :] + rays[finite, None] * net.directions[finite]
        out = np.empty(len(U))
        for i, u in enumerate(U):
            vals = re_inner(pts, u)
            if not finite.all():
                rec = re_inner(net.directions[~finite], u)
                if np.any(rec > 1e-12):
                    out[i] = np.inf
                    continue
            j = int(np.argmax(vals))
            v0 = net.directions[finite][j]

            def neg(x, u=u):
                w = x[:self.dim] + 1j * x[self.dim:]
                nw = np.linalg.norm(w)
                if nw < 1e-12:
                    return 0.0
                w = w / nw
                r = self.ray_many(z0, w[None, :])[0]
                if not np.isfinite(r):
                    return -1e18
                return -float(re_inner(z0 + r * w, u))

            x0 = np.concatenate([v0.real, v0.imag])
            res = minimize(neg, x0, method="Powell",
                           options={"xtol": 1e-10, "ftol": 1e-12, "maxiter": 400})
            out[i] = max(vals[j], -res.fun)
        return out

    def support(self, u) -> float:
        return float(self.support_many(np.asarray(u, dtype=np.complex128)[None, :])[0])

    # -- misc --------------------------------------------------------------
    def interior_point(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.complex128)

    def is_bounded_hint(self) -> Optional[bool]:
        return None

    def boundary_normal(self, y) -> Optional[np.ndarray]:
        """Outward normal at a boundary point from defining data, if any."""
        if self.defining_poly is None:
            return None
        g = self.defining_poly.grad_z(np.asarray(y, dtype=np.complex128))
        a = np.conjugate(2.0 * g)
        n = np.linalg.norm(a)
        return None if n < 1e-14 else a / n


@dataclass
class PointedDomain:
    domain: ConvexDomain
    basepoint: np.ndarray

    def __post_init__(self):
        self.basepoint = np.asarray(self.basepoint, dtype=np.complex128)
        if not self.domain.contains(self.basepoint):
            raise ValueError("basepoint is not inside the domain")
        eye = np.eye(self.domain.dim, dtype=np.complex128)
        rays = self.domain.ray_many(self.basepoint, np.concatenate([eye, -eye]))
        if np.any(np.minimum(rays, 1.0) < INTERIOR_EPS):
            raise ValueError("basepoint too close to the boundary")


# ----------------------------------------------------------------------
# families
# ----------------------------------------------------------------------
class Ball(ConvexDomain):
    family = "ball"

    def __init__(self, dim: int, radius: float = 1.0, center=None):
        super().__init__(dim)
        self.radius = float(radius)
        self.center = (np.zeros(dim, dtype=np.complex128) if center is None
                       else np.asarray(center, dtype=np.complex128))
        self.exact_poly = self._exact_sphere_poly()
        self.defining_poly = self.exact_poly.to_float()

    def _exact_sphere_poly(self) -> ZPoly:
        d = self.dim
        p = ZPoly.zero(d)
        cQ = [QC(Fraction(c.real), Fraction(c.imag)) for c in self.center]
        r2 = QC(Fraction(self.radius) ** 2)
        for j in range(d):
            zj = ZPoly.variable(d, j).to_exact()
            diff = zj - ZPoly.constant(d, cQ[j])
            p = p + diff * diff.conjugate()
        return p - ZPoly.constant(d, r2)

    def contains_many(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        return np.sum(np.abs(Z - self.center) ** 2, axis=1) < self.radius ** 2

    def ray_pairs(self, Z, U) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128) - self.center
        U = np.asarray(U, dtype=np.complex128)
        a = np.sum(np.abs(U) ** 2, axis=1)
        b = np.real(np.sum(U * np.conjugate(Z), axis=1))
        c = np.sum(np.abs(Z) ** 2, axis=1) - self.radius ** 2
        disc = np.maximum(b * b - a * c, 0.0)
        return (-b + np.sqrt(disc)) / a

    def support_many(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=np.complex128)
        return re_inner(np.broadcast_to(self.center, U.shape), U) + \
            self.radius * np.sqrt(np.sum(np.abs(U) ** 2, axis=1))

    def interior_point(self) -> np.ndarray:
        return self.center.copy()

    def is_bounded_hint(self):
        return True


class Egg(ConvexDomain):
    """Egg domain { sum |z_i|^(2 k_i) < level } with integer k_i >= 1."""

    family = "egg"

    def __init__(self, exponents: Sequence[int], level: Fraction | float = 1):
        super().__init__(len(exponents))
        self.exponents = tuple(int(k) for k in exponents)
        if any(k < 1 for k in self.exponents):
            raise ValueError("egg exponents must be >= 1")
        self.level = Fraction(level)
        d = self.dim
        p = ZPoly.zero(d)
        for j, k in enumerate(self.exponents):
            p = p + ZPoly.abs2(d, j, k)
        self.exact_poly = p.to_exact() - ZPoly.constant(d, QC(self.level))
        self.defining_poly = self.exact_poly.to_float()
        self._lev = float(self.level)

    def contains_many(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        k = np.array(self.exponents)
        return np.sum(np.abs(Z) ** (2 * k[None, :]), axis=1) < self._lev

    def ray_pairs(self, Z, U) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        U = np.asarray(U, dtype=np.complex128)
        k = np.array(self.exponents)
        two_k = 2 * k[None, :]

        def g_and_dg(t):
            pts = Z + t[:, None] * U
            q = np.abs(pts) ** 2
            powm1 = q ** (k[None, :] - 1)
            val = np.sum(powm1 * q, axis=1) - self._lev
            dq = 2.0 * np.real(np.conjugate(pts) * U)
            dval = np.sum(k[None, :] * powm1 * dq, axis=1)
            return val, dval

        n = U.shape[0]
        hi = np.full(n, 1.0)
        for _ in range(60):
            val, _ = g_and_dg(hi)
            out = val >= 0
            if out.all():
                break
            hi = np.where(out, hi, hi * 2.0)
            if np.all(hi > HORIZON):
                break
        # Newton from above: g is convex along the ray with g(0) < 0, so the
        # iterates decrease monotonically to the crossing
        t = hi
        for _ in range(60):
            val, dval = g_and_dg(t)
            step = np.where(dval > 0, val / np.maximum(dval, 1e-300), 0.0)
            t_new = t - step
            if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(t))):
                t = t_new
                break
            t = t_new
        return np.maximum(t, 0.0)

    def support_many(self, U) -> np.ndarray:
        # KKT for max sum r_i |u_i| subject to sum r_i^(2k_i) = level:
        # r_i = (|u_i| / (2 k_i lam))^(1/(2k_i - 1)); bisect on lam.
        U = np.asarray(U, dtype=np.complex128)
        absu = np.abs(U)
        k = np.array(self.exponents, dtype=float)

        def radii(lam):
            with np.errstate(divide="ignore"):
                r = (absu / (2.0 * k[None, :] * lam[:, None])) ** (1.0 / (2.0 * k[None, :] - 1.0))
            r[absu == 0] = 0.0
            return r

        def excess(lam):
            r = radii(lam)
            return np.sum(r ** (2 * k[None, :]), axis=1) - self._lev

        # Newton in log(lam): excess is smooth and strictly decreasing;
        # r^(2k) scales like lam^(-2k/(2k-1)), giving the derivative below.
        n = U.shape[0]
        nonzero = ~np.all(absu == 0, axis=1)
        lam = np.ones(n)
        for _ in range(200):
            r = radii(lam)
            pw = r ** (2 * k[None, :])
            val = np.sum(pw, axis=1) - self._lev
            dval_dlog = -np.sum((2 * k[None, :] / (2 * k[None, :] - 1.0)) * pw, axis=1)
            step = np.where(nonzero, val / np.where(dval_dlog < 0, dval_dlog, -1.0), 0.0)
            step = np.clip(step, -2.0, 2.0)
            lam = lam * np.exp(-step)
            if np.all(np.abs(step) < 1e-14):
                break
        r = radii(lam)
        out = np.sum(r * absu, axis=1)
        out[~nonzero] = 0.0
        return out

    def is_bounded_hint(self):
        return True


class Polydisc(ConvexDomain):
    """Product of discs { |z_i| < r_i }."""

    family = "polydisc"

    def __init__(self, radii: Sequence[float]):
        super().__init__(len(radii))
        self.radii = np.asarray(radii, dtype=float)
        if np.any(self.radii <= 0):
            raise ValueError("radii must be positive")

    def contains_many(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        return np.all(np.abs(Z) < self.radii[None, :], axis=1)

    def ray_pairs(self, Z, U) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        U = np.asarray(U, dtype=np.complex128)
        out = np.full(len(U), np.inf)
        for j in range(self.dim):
            a = np.abs(U[:, j]) ** 2
            b = np.real(U[:, j] * np.conjugate(Z[:, j]))
            c = np.abs(Z[:, j]) ** 2 - self.radii[j] ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                disc = np.maximum(b * b - a * c, 0.0)
                t = np.where(a > 0, (-b + np.sqrt(disc)) / np.where(a > 0, a, 1.0),
                             np.inf)
            out = np.minimum(out, t)
        return out

    def support_many(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=np.complex128)
        return np.sum(self.radii[None, :] * np.abs(U), axis=1)

    def is_bounded_hint(self):
        return True


class HalfspaceIntersection(ConvexDomain):
    """{ z : Re<z, a_j> < c_j } for rows a_j of ``normals``."""

    family = "halfspaces"

    def __init__(self, normals, offsets, interior=None):
        normals = np.asarray(normals, dtype=np.complex128)
        super().__init__(normals.shape[1])
        self.normals = normals
        self.offsets = np.asarray(offsets, dtype=float)
        self._interior = (np.zeros(self.dim, dtype=np.complex128) if interior is None
                          else np.asarray(interior, dtype=np.complex128))
        if not self.contains(self._interior):
            raise ValueError("interior point violates a halfspace")
        self._vertices = None
        self._bounded = None

    def contains_many(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        marg = np.real(Z @ np.conjugate(self.normals.T)) - self.offsets[None, :]
        return np.all(marg < 0, axis=1)

    def ray_pairs(self, Z, U) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        U = np.asarray(U, dtype=np.complex128)
        slack = self.offsets[None, :] - np.real(Z @ np.conjugate(self.normals.T))
        speed = np.real(U @ np.conjugate(self.normals.T))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(speed > 0, slack / speed, np.inf)
        out = np.min(t, axis=1)
        out[out > HORIZON] = np.inf
        return out

    def _real_embed(self):
        # halfspaces in R^(2d): Re<z,a> = x.ar + y.ai with a = ar + i*ai
        A = np.concatenate([self.normals.real, self.normals.imag], axis=1)
        return A, self.offsets

    def vertices(self) -> Optional[np.ndarray]:
        """Vertex set via scipy; None when unbounded."""
        if self._vertices is None and self._bounded is None:
            from scipy.spatial import HalfspaceIntersection as SciHS
            A, c = self._real_embed()
            ineq = np.hstack([A, -c[:, None]])
            ip = np.concatenate([self._interior.real, self._interior.imag])
            try:
                hs = SciHS(ineq, ip)
                V = hs.intersections
                if not np.all(np.isfinite(V)) or np.max(np.abs(V)) > HORIZON:
                    self._bounded = False
                else:
                    d = self.dim
                    self._vertices = V[:, :d] + 1j * V[:, d:]
                    self._bounded = True
            except Exception:
                self._bounded = False
        return self._vertices

    def support_many(self, U) -> np.ndarray:
        V = self.vertices()
        U = np.asarray(U, dtype=np.complex128)
        if V is not None:
            return np.max(np.real(U @ np.conjugate(V.T)), axis=1)
        # unbounded polytope: one LP per direction
        from scipy.optimize import linprog
        A, c = self._real_embed()
        out = np.empty(len(U))
        for i, u in enumerate(U):
            obj = -np.concatenate([u.real, u.imag])
            res = linprog(obj, A_ub=A, b_ub=c, bounds=(None, None), method="highs")
            out[i] = -res.fun if res.status == 0 else np.inf
        return out

    def interior_point(self) -> np.ndarray:
        return self._interior.copy()

    def is_bounded_hint(self):
        if self._bounded is None:
            self.vertices()
        return self._bounded


class PolynomialModel(ConvexDomain):
    """Model domain { (z0, z) : Re z0 < 1 - P(z) } in C^(1+d).

    ``P`` is a real-valued polynomial in the d tangential variables; the
    validating constructor lives in the rescaling module.
    """

    family = "poly_model"

    def __init__(self, P: ZPoly, exponents: Sequence[int]):
        super().__init__(P.nvars + 1)
        self.P = P.to_float()
        self.P_exact = P.to_exact() if P._exact() else None
        self.exponents = tuple(int(m) for m in exponents)
        d = self.dim
        # rho = Re z0 - 1 + P(z)
        shiftP = self._embed_P(P.to_float())
        z0 = ZPoly.variable(d, 0)
        rho = z0.scale(0.5) + z0.conjugate().scale(0.5) - ZPoly.constant(d, 1.0) + shiftP
        self.defining_poly = rho
        if P._exact():
            shiftE = self._embed_P(P)
            z0e = ZPoly.variable(d, 0).to_exact()
            half = QC(Fraction(1, 2))
            self.exact_poly = (z0e.scale(half) + z0e.conjugate().scale(half)
                               - ZPoly.constant(d, QC(1)) + shiftE)

    def _embed_P(self, P: ZPoly) -> ZPoly:
        out = {}
        for (a, b), c in P.terms.items():
            out[((0,) + a, (0,) + b)] = c
        return ZPoly(self.dim, out)

    def contains_many(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        return Z[:, 0].real < 1.0 - self.P.eval_real(Z[:, 1:])

    def ray_pairs(self, Z, U) -> np.ndarray:
        return _poly_ray(self, Z, U)

    def support_many(self, U) -> np.ndarray:
        # finite only when u is a positive multiple of e0 with real phase:
        # sup over z of [s*(1 - P(z)) + Re<z_t, u_t> - ...] handled by a
        # small concave maximization; otherwise +inf.
        from scipy.optimize import minimize
        U = np.asarray(U, dtype=np.complex128)
        out = np.empty(len(U))
        for i, u in enumerate(U):
            s = u[0].real
            if s <= 1e-14 or abs(u[0].imag) > 1e-14:
                out[i] = np.inf
                continue
            ut = u[1:]

            def neg(x):
                zt = x[:self.dim - 1] + 1j * x[self.dim - 1:]
                return -(s * (1.0 - float(self.P.eval_real(zt))) +
                         float(re_inner(zt, ut)))

            res = minimize(neg, np.zeros(2 * (self.dim - 1)), method="Powell",
                           options={"xtol": 1e-10, "ftol": 1e-12, "maxiter": 500})
            val = -res.fun
            out[i] = val if val < HORIZON else np.inf
        return out

    def interior_point(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.complex128)

    def is_bounded_hint(self):
        return False


class SiegelDomain(ConvexDomain):
    """Siegel model { Im z1 > sum_{i>=2} |z_i|^2 }."""

    family = "siegel"

    def __init__(self, dim: int):
        super().__init__(dim)
        d = dim
        z1 = ZPoly.variable(d, 0)
        # rho = sum |z_i|^2 - Im z1 ; -Im z1 = (i/2) z1 - (i/2) conj(z1)
        p = ZPoly.zero(d)
        for j in range(1, d):
            p = p + ZPoly.abs2(d, j)
        rho = p + z1.scale(0.5j) + z1.conjugate().scale(-0.5j)
        self.defining_poly = rho
        ie = QC(0, Fraction(1, 2))
        z1e = ZPoly.variable(d, 0).to_exact()
        pe = ZPoly.zero(d)
        for j in range(1, d):
            pe = pe + ZPoly.abs2(d, j).to_exact()
        self.exact_poly = pe + z1e.scale(ie) + z1e.conjugate().scale(-ie)

    def contains_many(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        return Z[:, 0].imag > np.sum(np.abs(Z[:, 1:]) ** 2, axis=1)

    def ray_pairs(self, Z, U) -> np.ndarray:
        return _poly_ray(self, Z, U)

    def support_many(self, U) -> np.ndarray:
        # finite iff u = -i s e1 + tangential: sup[-s Im z1 + Re<z',u'>]
        # with Im z1 > |z'|^2 gives |u'|^2 / (4 s).
        U = np.asarray(U, dtype=np.complex128)
        out = np.full(len(U), np.inf)
        s = -U[:, 0].imag        # coefficient of Im z1 in Re<z,u> is -Im(u1)... see below
        # Re(z1 * conj(u1)) = x1*Re(u1) + y1*Im(u1); x1 free => need Re(u1)=0;
        # y1 -> +inf => need Im(u1) < 0 for finiteness; then coeff of y1 is Im(u1).
        fin = (np.abs(U[:, 0].real) < 1e-14) & (U[:, 0].imag < -1e-14)
        if fin.any():
            s = -U[fin, 0].imag
            norm2 = np.sum(np.abs(U[fin, 1:]) ** 2, axis=1)
            out[fin] = norm2 / (4.0 * s)
        return out

    def interior_point(self) -> np.ndarray:
        z = np.zeros(self.dim, dtype=np.complex128)
        z[0] = 1j
        return z

    def is_bounded_hint(self):
        return False


class CustomDomain(ConvexDomain):
    """Membership-only oracle; rays via bisection."""

    family = "custom"

    def __init__(self, dim: int, membership: Callable[[np.ndarray], np.ndarray],
                 interior=None, bounded: Optional[bool] = None):
        super().__init__(dim)
        self._membership = membership
        self._interior = (np.zeros(dim, dtype=np.complex128) if interior is None
                          else np.asarray(interior, dtype=np.complex128))
        self._bounded = bounded

    def contains_many(self, Z) -> np.ndarray:
        return np.asarray(self._membership(np.asarray(Z, dtype=np.complex128)), dtype=bool)

    def interior_point(self) -> np.ndarray:
        return self._interior.copy()

    def is_bounded_hint(self):
        return self._bounded


class TransformedDomain(ConvexDomain):
    """Image A(base) of a domain under an invertible affine map.

    Membership, rays and support delegate to the base oracle exactly, so
    affine-equivariant quantities computed through this wrapper agree
    bitwise with the untransformed computation.
    """

    family = "transformed"

    def __init__(self, base: ConvexDomain, A: AffineMap):
        super().__init__(base.dim)
        if isinstance(base, TransformedDomain):
            A = A.compose(base.map)
            base = base.base
        self.base = base
        self.map = A
        self._inv = A.inverse()
        if base.defining_poly is not None:
            inv = self._inv
            M = [[inv.linear[r, c] for c in range(self.dim)] for r in range(self.dim)]
            b = list(inv.translation)
            self.defining_poly = base.defining_poly.subs_affine(M, b)
        if base.exact_poly is not None:
            try:
                Mq = [[QC.of(complex(self._inv.linear[r, c])) for c in range(self.dim)]
                      for r in range(self.dim)]
                bq = [QC.of(complex(x)) for x in self._inv.translation]
                self.exact_poly = base.exact_poly.subs_affine(Mq, bq)
            except (TypeError, ValueError):
                self.exact_poly = None

    def contains_many(self, Z) -> np.ndarray:
        return self.base.contains_many(self._inv(Z))

    def ray_pairs(self, Z, U) -> np.ndarray:
        return self.base.ray_pairs(self._inv(np.asarray(Z, dtype=np.complex128)),
                                   self._inv.apply_vector(U))

    def support_many(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=np.complex128)
        # h_{A(D)}(u) = Re<b,u> + h_D(L^H u)
        LH = np.conjugate(self.map.linear.T)
        pulled = U @ LH.T
        return re_inner(np.broadcast_to(self.map.translation, U.shape), U) + \
            self.base.support_many(pulled)

    def interior_point(self) -> np.ndarray:
        return self.map(self.base.interior_point())

    def is_bounded_hint(self):
        return self.base.is_bounded_hint()


def _poly_ray(domain: ConvexDomain, Z, U) -> np.ndarray:
    """Ray oracle for domains with convex polynomial defining function.

    Bracket by doubling, then Newton from above: rho is convex along the
    ray with rho < 0 at the basepoint, so the iterates decrease
    monotonically onto the crossing.
    """
    Z = np.asarray(Z, dtype=np.complex128)
    U = np.asarray(U, dtype=np.complex128)
    if Z.ndim == 1:
        Z = np.broadcast_to(Z, U.shape)
    rho = domain.defining_poly
    grads = getattr(domain, "_ray_grad_cache", None)
    if grads is None:
        grads = [rho.dz(j) for j in range(domain.dim)]
        domain._ray_grad_cache = grads
    n = U.shape[0]
    hi = np.full(n, 1.0)
    for _ in range(64):
        inside = rho.eval_real(Z + hi[:, None] * U) < 0
        grow = inside & (hi <= HORIZON)
        if not grow.any():
            break
        hi = np.where(grow, hi * 2.0, hi)
    unbounded = hi > HORIZON
    t = np.where(unbounded, 1.0, hi)
    for _ in range(60):
        pts = Z + t[:, None] * U
        val = rho.eval_real(pts)
        dval = np.zeros(n)
        for j in range(domain.dim):
            dval += 2.0 * np.real(grads[j].eval(pts) * U[:, j])
        with np.errstate(over="ignore", invalid="ignore"):
            step = np.where(dval > 1e-300, val / np.maximum(dval, 1e-300), 0.0)
        step = np.where(unbounded | ~np.isfinite(step), 0.0, step)
        t = t - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(t))):
            break
    out = np.maximum(t, 0.0)
    out[unbounded] = np.inf
    return out


# ----------------------------------------------------------------------
# spec operations
# ----------------------------------------------------------------------
def apply_affine(A: AffineMap, domain: ConvexDomain) -> ConvexDomain:
    if abs(np.linalg.det(A.linear)) < 1e-300:
        raise ValueError("singular linear part")
    return TransformedDomain(domain, A)


def ellipsoid(semiaxes, center=None) -> ConvexDomain:
    """Axis-aligned ellipsoid { sum |z_i|^2 / a_i^2 < 1 } (+ center)."""
    a = np.asarray(semiaxes, dtype=float)
    d = len(a)
    c = np.zeros(d, dtype=np.complex128) if center is None else np.asarray(center, np.complex128)
    return apply_affine(AffineMap(np.diag(a).astype(np.complex128), c), Ball(d))


def line_distance(domain: ConvexDomain, z, v, n_phases: int = 256) -> float:
    """Radius of the largest complex affine disc z + lambda*v inside the domain.

    Measured in the lambda parameter: min over phases theta of
    ray(z, e^{i theta} v), with golden-section refinement around the
    coarse minimizer.
    """
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if np.linalg.norm(v) == 0:
        raise ValueError("direction must be nonzero")
    if not domain.contains(z):
        raise ValueError("basepoint outside domain")
    return float(line_distance_pairs(domain, z[None, :], v[None, :],
                                     n_phases=n_phases)[0])


def line_distance_pairs(domain: ConvexDomain, Z, V, n_phases: int = 256,
                        refine_iters: int = 42) -> np.ndarray:
    """Vectorized line_distance for paired rows (Z_i, V_i).

    Coarse phase sweep followed by a golden-section refinement run
    synchronously across all rows.  Rows whose sampled rays are all
    unbounded get inf.
    """
    Z = np.asarray(Z, dtype=np.complex128)
    V = np.asarray(V, dtype=np.complex128)
    if Z.ndim == 1:
        Z = np.broadcast_to(Z, V.shape)
    n = len(V)
    thetas = np.linspace(0.0, 2.0 * np.pi, n_phases, endpoint=False)
    phases = np.exp(1j * thetas)
    dirs = (phases[None, :, None] * V[:, None, :]).reshape(-1, domain.dim)
    Zrep = np.repeat(Z, n_phases, axis=0)
    rays = domain.ray_pairs(Zrep, dirs).reshape(n, n_phases)
    best = np.min(rays, axis=1)
    unbounded = ~np.isfinite(best)
    i0 = np.argmin(np.where(np.isfinite(rays), rays, np.inf), axis=1)
    gap = 2.0 * np.pi / n_phases
    a = thetas[i0] - gap
    b = thetas[i0] + gap
    phi = (np.sqrt(5.0) - 1.0) / 2.0

    def f(t):
        d = np.exp(1j * t)[:, None] * V
        return domain.ray_pairs(Z, d)

    c = b - phi * (b - a)
    dd = a + phi * (b - a)
    fc, fd = f(c), f(dd)
    for _ in range(refine_iters):
        left = fc < fd
        b = np.where(left, dd, b)
        a = np.where(left, a, c)
        c = b - phi * (b - a)
        dd = a + phi * (b - a)
        fc = f(c)
        fd = f(dd)
    out = np.minimum(best, np.minimum(fc, fd))
    out[unbounded] = np.inf
    return out


def boundary_project(domain: ConvexDomain, x, subspace: Optional[np.ndarray] = None,
                     n_coarse: int = 512, seed: int = 0):
    """Closest boundary point to x within x + subspace (full space if None).

    Returns ``(point, distance, direction)``; raises if every probed ray in
    the slice is unbounded.
    """
    from .nets import DirectionNet
    from scipy.optimize import minimize

    x = np.asarray(x, dtype=np.complex128)
    if not domain.contains(x):
        raise ValueError("basepoint outside domain")
    d = domain.dim
    if subspace is None:
        B = np.eye(d, dtype=np.complex128)
    else:
        B = np.asarray(subspace, dtype=np.complex128)
        if B.ndim == 1:
            B = B[:, None]
        # orthonormalize columns so the real sphere in coefficients matches
        q, _ = np.linalg.qr(B)
        B = q[:, :B.shape[1]]
    k = B.shape[1]
    net = DirectionNet.standard(k, n_coarse, seed=seed)
    dirs = net.directions @ B.T  # unit vectors in the slice
    rays = domain.ray_many(x, dirs)
    finite = np.isfinite(rays)
    if not finite.any():
        raise UnboundedSliceError("no boundary point in the probed slice")
    # deterministic tie-break: lexicographically smallest direction among minima
    rmin = np.min(rays[finite])
    idx = np.where(finite & (rays <= rmin * (1 + 1e-12)))[0]
    cand = dirs[idx]
    order = np.lexsort(tuple(np.concatenate([cand.real, cand.imag], axis=1).T[::-1]))
    i0 = idx[order[0]]
    c0 = net.directions[i0]

    def obj(t):
        c = c0 + (t[:k] + 1j * t[k:])
        nc = np.linalg.norm(c)
        if nc < 1e-12:
            return 1e18
        u = (c / nc) @ B.T
        r = domain.ray_many(x, u[None, :])[0]
        return r if np.isfinite(r) else 1e18

    res = minimize(obj, np.zeros(2 * k), method="Powell",
                   options={"xtol": 1e-12, "ftol": 1e-14, "maxiter": 600})
    if res.fun < rays[i0]:
        c = c0 + (res.x[:k] + 1j * res.x[k:])
        u = (c / np.linalg.norm(c)) @ B.T
        r = float(domain.ray_many(x, u[None, :])[0])
    else:
        u = dirs[i0]
        r = float(rays[i0])
    return x + r * u, r, u


class UnboundedSliceError(RuntimeError):
    pass


def contains_affine_line(domain: ConvexDomain, n_dirs: int = 128,
                         n_phases: int = 16, seed: int = 0) -> bool:
    """Sampling certificate that the domain contains a complex affine line.

    True when some probed complex line through the interior point is
    unbounded at every sampled phase in both orientations.  This is a
    heuristic (a finite probe cannot prove absence of lines); ``False``
    means no line was found among the probes.
    """
    from .nets import DirectionNet

    z0 = domain.interior_point()
    d = domain.dim
    net = DirectionNet.standard(d, n_dirs, seed=seed)
    dirs = np.concatenate([np.eye(d, dtype=np.complex128), net.directions])
    thetas = np.exp(1j * np.linspace(0.0, np.pi * 2.0, 2 * n_phases, endpoint=False))
    for v in dirs:
        probe = thetas[:, None] * v[None, :]
        rays = domain.ray_many(z0, probe)
        if np.all(np.isinf(rays)):
            return True
    return False


# ----------------------------------------------------------------------
# JSON descriptors
# ----------------------------------------------------------------------
def domain_from_descriptor(desc) -> ConvexDomain:
    """Build a family domain from a JSON descriptor (dict or string).

    Schemas::

        {"family": "ball", "dim": 3, "radius": 1.0, "center": [[re, im], ...]}
        {"family": "egg", "exponents": [1, 2]}
        {"family": "ellipsoid", "semiaxes": [2.0, 1.0]}
        {"family": "halfspaces", "normals": [[[re, im], ...], ...], "offsets": [...]}
        {"family": "poly_model", "m": [4], "P": [{"alpha": [...], "beta": [...],
                                                  "coeff": [re, im]}, ...]}
        {"family": "siegel", "dim": 2}
    """
    if isinstance(desc, str):
        desc = json.loads(desc)
    fam = desc["family"]
    if fam == "ball":
        d = int(desc["dim"])
        center = None
        if "center" in desc:
            center = np.array([complex(re, im) for re, im in desc["center"]])
        return Ball(d, radius=float(desc.get("radius", 1.0)), center=center)
    if fam == "egg":
        return Egg([int(k) for k in desc["exponents"]])
    if fam == "ellipsoid":
        return ellipsoid([float(a) for a in desc["semiaxes"]])
    if fam == "halfspaces":
        normals = np.array([[complex(re, im) for re, im in row]
                            for row in desc["normals"]])
        return HalfspaceIntersection(normals, [float(c) for c in desc["offsets"]])
    if fam == "poly_model":
        m = [int(x) for x in desc["m"]]
        d = len(m)
        P = ZPoly.zero(d)
        for term in desc["P"]:
            a = tuple(int(x) for x in term["alpha"])
            b = tuple(int(x) for x in term["beta"])
            cre, cim = term["coeff"] if isinstance(term["coeff"], (list, tuple)) \
                else (term["coeff"], 0.0)
            P = P + ZPoly(d, {(a, b): complex(cre, cim)})
        from .rescale import model_domain
        return model_domain(m, P)
    if fam == "siegel":
        return SiegelDomain(int(desc["dim"]))
    raise ValueError(f"unknown family {fam!r}")
