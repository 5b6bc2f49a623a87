"""Affine normalization into the compact family and boundary blow-ups.

Pipeline pieces:

- ``frankel_normalize``: successive closest boundary points in orthogonal
  complex slices give the affine map Lambda U T placing a pointed domain
  into the compact normalized family (unit discs on the axes, model
  planes disjoint).
- ``verify_K_membership`` / ``verify_family_membership``: sampled
  certificates for the normalized families; disc margins come from phase
  sweeps, plane margins from separating-functional ascent.
- ``model_domain`` / ``verify_model_tangency``: validated weighted
  homogeneous model domains {Re z0 < 1 - P(z)}.
- ``rescale_finite_type`` / ``pinchuk_rescale``: nonisotropic dilations
  at a finite-type (resp. strongly pseudoconvex) boundary point, with the
  candidate limit extracted as the weighted-unit part of the centered
  defining polynomial.
- ``flag_normalize``: the supporting-flag construction at a boundary
  affine disc.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .domains import (AffineMap, ConvexDomain, PointedDomain, PolynomialModel,
                      SiegelDomain, TransformedDomain, UnboundedSliceError,
                      apply_affine, boundary_project, line_distance, re_inner)
from .exactpoly import QC, ZPoly, exact_solve
from .linetype import boundary_jet, filtration, type_tuple, INF_TYPE, _as_qc_vector
from .nets import DirectionNet

__all__ = ["NormalizationResult", "FamilyMembershipReport", "RescaleSequence",
           "frankel_normalize", "verify_K_membership", "model_domain",
           "verify_model_tangency", "rescale_finite_type", "pinchuk_rescale",
           "flag_normalize", "verify_family_membership", "ModelValidationError",
           "WrongTypeError", "NotStronglyPseudoconvex"]


class ModelValidationError(ValueError):
    def __init__(self, kind: str, witness=None):
        super().__init__(f"model validation failed: {kind}"
                         + (f" (witness {witness})" if witness is not None else ""))
        self.kind = kind
        self.witness = witness


class WrongTypeError(RuntimeError):
    """Dilated domains diverge: supplied type does not match the point."""


class NotStronglyPseudoconvex(ValueError):
    pass


# ----------------------------------------------------------------------
# Frankel normalization
# ----------------------------------------------------------------------
@dataclass
class NormalizationResult:
    map: AffineMap
    contacts: list
    scales: list

    def apply(self, domain: ConvexDomain) -> ConvexDomain:
        return apply_affine(self.map, domain)


def frankel_normalize(p: PointedDomain) -> NormalizationResult:
    """Affine map Lambda U T with successive orthogonal boundary contacts.

    T translates the basepoint to 0; U rotates the contact directions to
    the coordinate axes; Lambda rescales each axis by the contact
    distance.  Slices with no boundary point raise UnboundedSliceError.
    """
    domain, x = p.domain, p.basepoint
    d = domain.dim
    contacts = []
    dirs = []
    for k in range(d):
        if k == 0:
            subspace = None
        else:
            D = np.array(dirs).T  # (d, k)
            q, _ = np.linalg.qr(np.concatenate([D, np.eye(d, dtype=np.complex128)],
                                               axis=1))
            subspace = q[:, k:d]
        y, r, u = boundary_project(domain, x, subspace=subspace)
        contacts.append(y)
        dirs.append((y - x) / np.linalg.norm(y - x))
    scales = [float(np.linalg.norm(y - x)) for y in contacts]
    Q = np.array(dirs).T
    U = np.conjugate(Q.T)
    Lam = np.diag([1.0 / s for s in scales]).astype(np.complex128)
    L = Lam @ U
    A = AffineMap(L, -L @ x)
    return NormalizationResult(map=A, contacts=contacts, scales=scales)


# ----------------------------------------------------------------------
# family membership verification
# ----------------------------------------------------------------------
@dataclass
class FamilyMembershipReport:
    family: str
    disc_checks: list = field(default_factory=list)    # (ok, margin) per axis
    plane_checks: list = field(default_factory=list)   # (ok, margin) per axis
    boundary_disc_check: Optional[tuple] = None
    tol: float = 1e-6

    @property
    def passed(self) -> bool:
        ok = all(c[0] for c in self.disc_checks) and all(c[0] for c in self.plane_checks)
        if self.boundary_disc_check is not None:
            ok = ok and self.boundary_disc_check[0]
        return ok


def _disc_margin(domain: ConvexDomain, axis: int, n_phases: int = 64) -> float:
    """min over phases of ray(0, e^{i theta} e_axis) - 1."""
    d = domain.dim
    v = np.zeros(d, dtype=np.complex128)
    v[axis] = 1.0
    return float(line_distance(domain, np.zeros(d, dtype=np.complex128), v,
                               n_phases=n_phases) - 1.0)


def _plane_margin(domain: ConvexDomain, axis: int, n_net: int = 256,
                  refine: bool = True) -> float:
    """Best separation margin sup_u [Re u_axis - h(u)] over unit u with
    u_j = 0 for j > axis; >= 0 certifies Z_axis disjoint from the domain."""
    from scipy.optimize import minimize

    d = domain.dim
    k = axis + 1

    def margin_of(u_sub) -> float:
        full = np.zeros(d, dtype=np.complex128)
        full[:k] = u_sub
        hv = domain.support_many(full[None, :])[0]
        return float(u_sub[axis].real - hv) if np.isfinite(hv) else -np.inf

    net = DirectionNet.standard(k, n_net)
    U = np.zeros((net.size, d), dtype=np.complex128)
    U[:, :k] = net.directions
    h = domain.support_many(U)
    g = np.where(np.isfinite(h), U[:, axis].real - h, -np.inf)
    i0 = int(np.argmax(g))
    best = float(g[i0])
    seeds = [net.directions[i0]] if np.isfinite(best) else []
    # contact normal at e_axis: the natural separating functional for
    # unbounded model domains whose finite-support directions the net
    # cannot hit (trailing components vanish by the tangency identity)
    e_ax = np.zeros(d, dtype=np.complex128)
    e_ax[axis] = 1.0
    nrm = domain.boundary_normal(e_ax)
    if nrm is not None:
        u_sub = nrm[:k].copy()
        if np.linalg.norm(u_sub) > 1e-9 and np.linalg.norm(nrm[k:]) < 1e-7:
            u_sub = u_sub / np.linalg.norm(u_sub)
            if abs(u_sub[0].imag) < 1e-9:
                # drop float junk so unbounded-domain support stays finite
                u_sub[0] = u_sub[0].real
            best = max(best, margin_of(u_sub))
            seeds.append(u_sub)

    if refine:
        def neg(t):
            u = t[:k] + 1j * t[k:]
            nu = np.linalg.norm(u)
            if nu < 1e-12:
                return 1e18
            m = margin_of(u / nu)
            return 1e18 if not np.isfinite(m) else -m

        for u0 in seeds:
            res = minimize(neg, np.concatenate([u0.real, u0.imag]), method="Powell",
                           options={"xtol": 1e-10, "ftol": 1e-12, "maxfev": 400})
            if np.isfinite(res.fun):
                best = max(best, -float(res.fun))
    return best


def verify_K_membership(domain: ConvexDomain, tol: float = 1e-6,
                        n_phases: int = 64) -> FamilyMembershipReport:
    """Check unit-disc containment on every axis and disjointness of the
    model planes Z_i = e_i + span(e_{i+1}, ..., e_d)."""
    rep = FamilyMembershipReport(family="K", tol=tol)
    for i in range(domain.dim):
        m = _disc_margin(domain, i, n_phases)
        rep.disc_checks.append((m >= -tol, m))
    for i in range(domain.dim):
        m = _plane_margin(domain, i)
        rep.plane_checks.append((m >= -tol, m))
    return rep


# ----------------------------------------------------------------------
# model domains
# ----------------------------------------------------------------------
def _weights(m: Sequence[int]) -> list[Fraction]:
    return [Fraction(1, int(mi)) for mi in m]


def model_domain(m: Sequence[int], P: ZPoly, n_samples: int = 400,
                 seed: int = 0, tol: float = 1e-9) -> PolynomialModel:
    """Validated model domain {Re z0 < 1 - P(z)} with weight tuple m.

    Homogeneity is checked exactly monomial by monomial; non-negativity,
    convexity, and real-valuedness are checked by seeded sampling.
    """
    m = [int(x) for x in m]
    if any(mi < 2 for mi in m) or any(m[i] > m[i + 1] for i in range(len(m) - 1)):
        raise ModelValidationError("exponent tuple must be nondecreasing and >= 2")
    if P.nvars != len(m):
        raise ModelValidationError("dimension mismatch")
    w = _weights(m)
    for (a, b) in P.terms:
        deg = sum((ai + bi) * wi for ai, bi, wi in zip(a, b, w))
        if deg != 1:
            raise ModelValidationError("weighted homogeneity", witness=(a, b))
    z0 = (0,) * P.nvars
    if (z0, z0) in P.terms:
        raise ModelValidationError("P(0) must vanish")
    if not P.to_float().is_hermitian_symmetric(tol=1e-10):
        raise ModelValidationError("P must be real-valued")
    rng = np.random.default_rng(seed)
    Pf = P.to_float()
    pts = rng.standard_normal((n_samples, P.nvars)) + 1j * rng.standard_normal((n_samples, P.nvars))
    vals = Pf.eval_real(pts)
    if np.min(vals) < -tol * max(1.0, float(np.max(np.abs(vals)))):
        raise ModelValidationError("negativity", witness=pts[int(np.argmin(vals))])
    for z in pts[:60]:
        H = Pf.real_hessian(z)
        lam = np.linalg.eigvalsh(0.5 * (H + H.T))
        if lam.min() < -1e-7 * max(1.0, lam.max()):
            raise ModelValidationError("non-convexity", witness=z)
    return PolynomialModel(P, m)


def verify_model_tangency(model: PolynomialModel) -> tuple[bool, list]:
    """Cross partials dP/dz_j at the axis contacts e_i vanish for i < j.

    Exact polynomial differentiation and evaluation; witnesses list the
    failing (i, j, value) triples.
    """
    P = model.P_exact if model.P_exact is not None else model.P.to_exact()
    d = P.nvars
    witnesses = []
    for j in range(d):
        dPj = P.dz(j)
        for i in range(j):
            e = [QC(0)] * d
            e[i] = QC(1)
            val = dPj.eval_exact(e)
            if val:
                witnesses.append((i + 1, j + 1, complex(val)))
    return (not witnesses), witnesses


def verify_family_membership(domain: ConvexDomain, family,
                             tol: float = 1e-6) -> FamilyMembershipReport:
    """Membership check for F, P(m), or L.

    ``family`` is "F", "L", or a tuple ("P", m).  F runs the K-style
    checks on all ambient axes plus the boundary-disc condition
    e_0 + D e_1 in the boundary; P(m) requires validated model data plus
    the K-style checks; L is F or P(m) with m != (2, ..., 2).
    """
    if isinstance(family, tuple) and family[0] == "P":
        m = list(family[1])
        if not isinstance(domain, PolynomialModel):
            raise ValueError("P(m) membership requires a model domain")
        model_domain(m, domain.P_exact if domain.P_exact is not None else domain.P)
        rep = verify_K_membership(domain, tol=tol)
        rep.family = f"P({','.join(str(x) for x in m)})"
        return rep
    if family == "F":
        rep = verify_K_membership(domain, tol=tol)
        rep.family = "F"
        rep.boundary_disc_check = _boundary_disc_check(domain, tol)
        return rep
    if family == "L":
        if isinstance(domain, PolynomialModel):
            m = list(domain.exponents)
            if all(x == 2 for x in m):
                rep = FamilyMembershipReport(family="L", tol=tol)
                rep.plane_checks.append((False, -1.0))
                return rep
            rep = verify_family_membership(domain, ("P", m), tol=tol)
            rep.family = "L"
            return rep
        rep = verify_family_membership(domain, "F", tol=tol)
        rep.family = "L"
        return rep
    raise ValueError(f"unknown family {family!r}")


def _boundary_disc_check(domain: ConvexDomain, tol: float,
                         n_r: int = 12, n_phases: int = 16) -> tuple[bool, float]:
    """e_0 + D e_1 lies in the boundary: points outside the open set but
    inward perturbations inside."""
    d = domain.dim
    e0 = np.zeros(d, dtype=np.complex128)
    e0[0] = 1.0
    worst = np.inf
    ok = True
    for r in np.linspace(0.0, 0.95, n_r):
        for th in np.linspace(0.0, 2 * np.pi, n_phases, endpoint=False):
            p = e0.copy()
            p[1] = r * np.exp(1j * th)
            if domain.contains(p):
                ok = False
                worst = min(worst, -1.0)
                continue
            inner = domain.contains(p * (1.0 - 1e-6))
            if not inner:
                ok = False
            worst = min(worst, 0.0 if inner else -1.0)
    return ok, worst


# ----------------------------------------------------------------------
# rescaling at boundary points
# ----------------------------------------------------------------------
@dataclass
class RescaleSequence:
    xi: np.ndarray
    deltas: list
    basepoints: list
    maps: list                      # AffineMap per n
    target: ConvexDomain
    mode: str
    type_tuple: tuple

    def domains(self, base: ConvexDomain) -> list[ConvexDomain]:
        return [apply_affine(A, base) for A in self.maps]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "type": [str(x) for x in self.type_tuple],
            "deltas": [float(d) for d in self.deltas],
            "maps": [{
                "linear_real": np.real(A.linear).tolist(),
                "linear_imag": np.imag(A.linear).tolist(),
                "translation_real": np.real(A.translation).tolist(),
                "translation_imag": np.imag(A.translation).tolist(),
            } for A in self.maps],
        }


def _centering_data(domain: ConvexDomain, xi):
    """Exact centering at xi: w0 = <z-xi, a>/|a|^2 (Re w0 < 0 inside),
    tangential coordinates by pivot completion.  Returns (M, xiq, a)."""
    rho = domain.exact_poly
    if rho is None:
        if domain.defining_poly is None:
            raise ValueError("rescaling requires polynomial defining data")
        rho = domain.defining_poly.to_exact()
    xiq = _as_qc_vector(xi)
    d = rho.nvars
    grads = [rho.dz(j).eval_exact(xiq) for j in range(d)]
    a = [g.conjugate() * QC(2) for g in grads]
    mags = [abs(complex(x)) for x in a]
    if max(mags) < 1e-13:
        raise ValueError("vanishing gradient at xi")
    pivot = int(np.argmax(mags))
    norm2 = QC(0)
    for aj in a:
        norm2 = norm2 + aj * aj.conjugate()
    M = [[QC(0) for _ in range(d)] for _ in range(d)]
    inv_norm2 = QC(1) / norm2
    for j in range(d):
        M[0][j] = a[j].conjugate() * inv_norm2
    row = 1
    for j in range(d):
        if j == pivot:
            continue
        M[row][j] = QC(1)
        row += 1
    return rho, xiq, a, M, pivot


def _adapted_tangential_basis(domain: ConvexDomain, xi, order=None):
    """Flag-adapted tangential basis columns and the type tuple.

    Column j of the returned basis has vanishing order m_j, ascending, and
    the span of the columns with order >= r is the corresponding jump
    subspace.
    """
    jet = boundary_jet(domain, xi, order=order)
    chain = filtration(jet)
    k = jet.poly.nvars
    eye = [[QC(1) if i == c else QC(0) for i in range(k)] for c in range(k)]
    prev_cols = eye  # columns of the current subspace, ambient coordinates
    cols: list[list[QC]] = []
    orders: list = []
    for r, dim_b, dim_a, ambient, _cert in chain:
        if r == INF_TYPE or ambient is None:
            cols.extend(prev_cols)
            orders.extend([INF_TYPE] * dim_b)
            prev_cols = []
            break
        inner_cols = [list(col) for col in ambient]
        comp = _extend_basis(inner_cols, prev_cols, k)
        cols.extend(comp)
        orders.extend([r] * (dim_b - dim_a))
        prev_cols = inner_cols
        if dim_a == 0:
            prev_cols = []
            break
    cols.extend(prev_cols)
    return cols, tuple(orders), jet


def _extend_basis(inner_cols, outer_cols, k):
    """Columns of ``outer_cols`` extending span(inner_cols), exact."""
    chosen = [list(c) for c in inner_cols]
    extra = []
    for cand in outer_cols:
        trial = chosen + [list(cand)]
        if _rank_qc(trial, k) > len(chosen):
            chosen.append(list(cand))
            extra.append(list(cand))
    return extra


def _rank_qc(cols, k):
    A = [[cols[c][r] for c in range(len(cols))] for r in range(k)]
    rank = 0
    rows = len(A)
    ncols = len(cols)
    col = 0
    A = [row[:] for row in A]
    for c in range(ncols):
        piv = None
        for r in range(rank, rows):
            if A[r][c]:
                piv = r
                break
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = QC(1) / A[rank][c]
        A[rank] = [x * inv for x in A[rank]]
        for r in range(rows):
            if r != rank and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def _qc_matrix_to_np(M) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in M], dtype=np.complex128)


def _extract_leading(domain: ConvexDomain, xi, m=None, order=None):
    """Centered defining polynomial in adapted coordinates and its
    weighted-unit part c*Re(w0) + P0(w)."""
    rho, xiq, a, M, pivot = _centering_data(domain, xi)
    cols, orders, jet = _adapted_tangential_basis(domain, xi, order=order)
    if m is not None:
        m = tuple(int(x) if x != INF_TYPE else INF_TYPE for x in m)
        if tuple(orders) != m:
            raise WrongTypeError(f"supplied type {m} but computed {tuple(orders)}")
    if any(o == INF_TYPE for o in orders):
        raise WrongTypeError("infinite-type point; finite-type rescaling refused")
    d = rho.nvars
    k = d - 1
    # tangential change: w_t = Q^{-1} (coordinate completion coords)
    Q = [[cols[c][r] for c in range(k)] for r in range(k)]
    Qinv = exact_solve(Q, [[QC(1) if i == j else QC(0) for j in range(k)]
                           for i in range(k)])
    # full map: w = B (z - xi) with B = blockdiag(1, Qinv) @ M
    B = [[QC(0) for _ in range(d)] for _ in range(d)]
    for j in range(d):
        B[0][j] = M[0][j]
    for r in range(k):
        for j in range(d):
            s = QC(0)
            for l in range(k):
                s = s + Qinv[r][l] * M[1 + l][j]
            B[1 + r][j] = s
    Binv = exact_solve(B, [[QC(1) if i == j else QC(0) for j in range(d)]
                           for i in range(d)])
    # z = Binv w + xi
    rho_c = rho.subs_affine(Binv, xiq)
    weights = [Fraction(1)] + [Fraction(1, int(o)) for o in orders]
    lead = rho_c.weighted_part(weights, Fraction(1))
    # guard: no sub-unit-weight terms may survive
    for (al, be), c in rho_c.terms.items():
        wdeg = sum((ai + bi) * wi for ai, bi, wi in zip(al, be, weights))
        if wdeg < 1 and abs(complex(c)) > 1e-10:
            raise WrongTypeError(f"sub-critical term {al},{be} in centered data")
    return rho_c, lead, B, tuple(orders), weights


def _split_leading(lead: ZPoly):
    """Split c*x + P0(w_t) (+ optional quadratic-in-w0 pure terms)."""
    d = lead.nvars
    c_half = lead.terms.get((tuple([1] + [0] * (d - 1)), (0,) * d), QC(0))
    c = complex(c_half) * 2.0
    if abs(c.imag) > 1e-12 or c.real <= 0:
        raise WrongTypeError("leading linear part is not a positive multiple of Re w0")
    P0 = ZPoly(d - 1)
    for (a, b), coeff in lead.terms.items():
        if a[0] == 0 and b[0] == 0:
            P0 = P0 + ZPoly(d - 1, {(a[1:], b[1:]): coeff})
    return c.real, P0


def rescale_finite_type(domain: ConvexDomain, xi, m=None, deltas=None,
                        order=None) -> RescaleSequence:
    """Nonisotropic blow-up at a finite-type boundary point.

    Centers xi at 0 with tangent plane {Re w0 = 0}, dilates by
    diag(1/delta, delta^(-1/m_1), ..., delta^(-1/m_k)) in flag-adapted
    coordinates, and shifts to the model frame {Re z0 < 1 - P(z)}.  The
    candidate limit polynomial is the weighted-unit part of the centered
    defining data, block-normalized so the axis contacts sit at the
    basis vectors.
    """
    if deltas is None:
        deltas = [2.0 ** (-n) for n in range(1, 11)]
    rho_c, lead, B, orders, weights = _extract_leading(domain, xi, m=m, order=order)
    c, P0 = _split_leading(lead)
    k = P0.nvars
    P1 = P0.scale(QC(1) / QC.of(complex(c))) if P0._exact() else P0.scale(1.0 / c)
    # block normalization: scale each tangential axis so P(e_j) = 1
    model0 = PolynomialModel(P1, [int(o) for o in orders])
    scalesN = _block_contact_scales(model0)
    N = np.diag([1.0] + [1.0 / s for s in scalesN]).astype(np.complex128)
    P_hat = P1.to_float().subs_affine(
        [[complex(scalesN[j]) if i == j else 0j for j in range(k)] for i in range(k)],
        [0j] * k)
    target = model_domain([int(o) for o in orders], P_hat, seed=7)
    Bnp = _qc_matrix_to_np(B)
    xnp = np.asarray([complex(q) for q in _as_qc_vector(xi)], dtype=np.complex128)
    center = AffineMap(Bnp, -Bnp @ xnp)
    maps = []
    basepoints = []
    a_vec = _gradient_direction(domain, xi)
    d = domain.dim
    e0 = np.zeros(d, dtype=np.complex128)
    e0[0] = 1.0
    for delta in deltas:
        diag = [1.0 / delta] + [delta ** (-1.0 / float(o)) for o in orders]
        D = AffineMap(np.diag(diag).astype(np.complex128),
                      np.zeros(d, dtype=np.complex128))
        S = AffineMap(N, e0.copy())
        A = S.compose(D.compose(center))
        maps.append(A)
        basepoints.append(xnp - delta * a_vec)
    return RescaleSequence(xi=xnp, deltas=list(deltas), basepoints=basepoints,
                           maps=maps, target=target, mode="finite_type",
                           type_tuple=orders)


def _gradient_direction(domain: ConvexDomain, xi) -> np.ndarray:
    """Outward vector a with <z-xi, a>/|a|^2 the centered normal coordinate;
    basepoints xi - delta*a then sit at Re w0 = -delta exactly."""
    rho = domain.defining_poly
    xiq = np.asarray([complex(q) for q in _as_qc_vector(xi)], dtype=np.complex128)
    g = rho.grad_z(xiq)
    return np.conjugate(2.0 * g)


def _block_contact_scales(model: PolynomialModel) -> list[float]:
    """Closest boundary point scale per tangential axis: P(s e_j) = 1."""
    P = model.P
    k = P.nvars
    out = []
    for j in range(k):
        v = np.zeros(k, dtype=np.complex128)
        v[j] = 1.0
        # minimize boundary radius over the phase: P(s e^{i t} e_j) = 1
        def radius(t):
            lo, hi = 1e-9, 1.0
            w = np.exp(1j * t) * v
            while P.eval_real(hi * w) < 1.0 and hi < 1e9:
                hi *= 2.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if P.eval_real(mid * w) < 1.0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        vals = [radius(t) for t in np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)]
        out.append(float(min(vals)))
    return out


def pinchuk_rescale(domain: ConvexDomain, xi, deltas=None,
                    order=None) -> RescaleSequence:
    """Blow-up at a strongly pseudoconvex point toward the Siegel model.

    Requires line type (2, ..., 2) and a Hermitian 2-jet (no pure
    (2,0)-part in adapted coordinates; the affine-only rescaling has no
    target otherwise).  Basepoints map to (i, 0, ..., 0).
    """
    if deltas is None:
        deltas = [2.0 ** (-n) for n in range(1, 11)]
    rho_c, lead, B, orders, weights = _extract_leading(domain, xi, order=order)
    if any(o != 2 for o in orders):
        raise NotStronglyPseudoconvex(f"line type {orders} at xi")
    c, P0 = _split_leading(lead)
    k = P0.nvars
    # split P0 = H(w,wbar) + Re B2(w,w); require B2 = 0
    H = np.zeros((k, k), dtype=np.complex128)
    for (a, b), coeff in P0.to_float().terms.items():
        if sum(a) == 1 and sum(b) == 1:
            i = a.index(1)
            j = b.index(1)
            H[i, j] += complex(coeff)
        elif sum(a) + sum(b) == 2:
            if abs(complex(coeff)) > 1e-10:
                raise NotStronglyPseudoconvex(
                    "non-Hermitian 2-jet; affine rescaling target undefined")
    Hm = 0.5 * (H + np.conjugate(H.T))
    evals, V = np.linalg.eigh(Hm)
    if evals.min() <= 0:
        raise NotStronglyPseudoconvex("degenerate Hermitian 2-jet")
    # zeta1 = -i w0, zeta' = diag(sqrt(h/c)) V^H w_t
    d = domain.dim
    T = np.zeros((d, d), dtype=np.complex128)
    T[0, 0] = -1j
    T[1:, 1:] = np.diag(np.sqrt(evals / c)) @ np.conjugate(V.T)
    Bnp = _qc_matrix_to_np(B)
    xnp = np.asarray([complex(q) for q in _as_qc_vector(xi)], dtype=np.complex128)
    center = AffineMap(Bnp, -Bnp @ xnp)
    a_vec = _gradient_direction(domain, xi)
    maps = []
    basepoints = []
    for delta in deltas:
        diag = [1.0 / delta] + [delta ** (-0.5)] * k
        D = AffineMap(np.diag(diag).astype(np.complex128),
                      np.zeros(d, dtype=np.complex128))
        A = AffineMap(T, np.zeros(d, dtype=np.complex128)).compose(D.compose(center))
        maps.append(A)
        basepoints.append(xnp - delta * a_vec)
    return RescaleSequence(xi=xnp, deltas=list(deltas), basepoints=basepoints,
                           maps=maps, target=SiegelDomain(d), mode="pinchuk",
                           type_tuple=orders)


# ----------------------------------------------------------------------
# infinite-type flag normalization
# ----------------------------------------------------------------------
def flag_normalize(domain: ConvexDomain, tol: float = 1e-6) -> AffineMap:
    """Supporting-flag linear normalization for a domain with a boundary
    affine disc e_0 + D e_1 (all in the closed boundary) and unit discs
    D e_0, D e_1 inside.

    Picks supporting complex subspaces orthogonal to the contact normal
    at each step and maps the flag points y_i to the basis vectors.
    """
    d = domain.dim
    e0 = np.zeros(d, dtype=np.complex128)
    e0[0] = 1.0
    e1 = np.zeros(d, dtype=np.complex128)
    e1[1] = 1.0
    # hypothesis checks (sampled)
    bd = _boundary_disc_check(domain, tol)
    if not bd[0]:
        raise ValueError("boundary disc hypothesis fails")
    for axis in (0, 1):
        if _disc_margin(domain, axis) < -tol:
            raise ValueError("unit disc hypothesis fails")
    ys = [e0]
    u0 = _supporting_normal(domain, e0)
    W = _complex_complement(u0[None, :])
    # y1: nearest boundary point on the line C e1
    r1 = line_distance(domain, np.zeros(d, dtype=np.complex128), e1)
    th = _argmin_phase(domain, e1)
    y1 = r1 * np.exp(1j * th) * e1
    ys.append(y1)
    u1 = _supporting_normal(domain, y1)
    W = _intersect_complement(W, u1)
    for k in range(2, d):
        if W.shape[1] == 0:
            raise ValueError("flag construction stalled: no subspace left")
        try:
            y, r, _ = boundary_project(domain, np.zeros(d, dtype=np.complex128),
                                       subspace=W)
        except UnboundedSliceError as exc:
            raise ValueError("degenerate slice in flag construction") from exc
        ys.append(y)
        uk = _supporting_normal(domain, y)
        W = _intersect_complement(W, uk)
    Y = np.array(ys).T
    if abs(np.linalg.det(Y)) < 1e-12:
        raise ValueError("flag points are linearly dependent")
    A = np.linalg.inv(Y)
    return AffineMap(A, np.zeros(d, dtype=np.complex128))


def _argmin_phase(domain: ConvexDomain, v, n: int = 256) -> float:
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    dirs = np.exp(1j * th)[:, None] * v[None, :]
    rays = domain.ray_many(np.zeros(domain.dim, dtype=np.complex128), dirs)
    return float(th[int(np.argmin(rays))])


def _supporting_normal(domain: ConvexDomain, y, n_net: int = 1024):
    """Outward unit normal of a supporting hyperplane at boundary point y."""
    from scipy.optimize import minimize

    nrm = domain.boundary_normal(y)
    if nrm is not None:
        return nrm
    d = domain.dim
    net = DirectionNet.standard(d, n_net)
    h = domain.support_many(net.directions)
    score = re_inner(np.broadcast_to(y, net.directions.shape), net.directions) - h
    i0 = int(np.argmax(score))

    def neg(t):
        u = t[:d] + 1j * t[d:]
        nu = np.linalg.norm(u)
        if nu < 1e-12:
            return 1e18
        u = u / nu
        hv = domain.support_many(u[None, :])[0]
        if not np.isfinite(hv):
            return 1e18
        return -(float(re_inner(y, u)) - hv)

    u0 = net.directions[i0]
    res = minimize(neg, np.concatenate([u0.real, u0.imag]), method="Powell",
                   options={"xtol": 1e-12, "ftol": 1e-14, "maxfev": 800})
    u = res.x[:d] + 1j * res.x[d:]
    return u / np.linalg.norm(u)


def _complex_complement(rows: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the complex orthogonal complement."""
    d = rows.shape[1]
    q, _ = np.linalg.qr(np.concatenate([np.conjugate(rows.T),
                                        np.eye(d, dtype=np.complex128)], axis=1))
    return q[:, rows.shape[0]:d]


def _intersect_complement(W: np.ndarray, u: np.ndarray) -> np.ndarray:
    """W ∩ {v : <v,u> = 0} as orthonormal columns."""
    coeffs = np.conjugate(W.T) @ u  # <w_i, u> components
    if np.linalg.norm(coeffs) < 1e-12:
        return W
    q, _ = np.linalg.qr(np.concatenate([coeffs[:, None],
                                        np.eye(W.shape[1], dtype=np.complex128)],
                                       axis=1))
    inner = q[:, 1:]
    return W @ inner
