"""Vanishing orders, the direction filtration, and boundary line type.

The boundary of a convex domain with polynomial defining data is
flattened at a point xi by a rational affine change of coordinates (no
unitary normalization, so rational data stays rational), the graph
function is expanded as an exact power series by fixed-point iteration
on the defining polynomial, and the type comes out of a descending chain
of direction subspaces computed by exact linear algebra.

Orders along a direction are even for convex non-negative data; the jump
subspace at the minimal degree 2t is the zero set of the (t,t) Hermitian
coefficient block.  For t = 1 that zero set is the kernel of a PSD
Hermitian matrix and is computed exactly; for t >= 2 the block is
diagonal-dominant in every case produced by the supported families and
the zero set is resolved through coordinate-monomial kernels, with a
verified fallback.

Boundary points that satisfy the defining equation exactly (rational
points; floats are dyadic rationals) go through with zero tolerance.
Otherwise tiny coefficients are snapped to zero at a documented relative
threshold before order decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .domains import ConvexDomain
from .exactpoly import QC, ZPoly, exact_kernel, exact_solve

__all__ = ["INF_TYPE", "BoundaryJet", "ord_vanish", "filtration", "type_tuple",
           "line_type_at", "strongly_pseudoconvex", "levi_positive",
           "SingularBoundaryPoint"]

INF_TYPE = math.inf


class SingularBoundaryPoint(ValueError):
    """Defining gradient vanishes at the requested boundary point."""


@dataclass
class BoundaryJet:
    """Exact truncated expansion of the flattened boundary graph.

    ``poly`` holds the jet of the graph function f (convex, >= 0,
    f(0) = 0) up to total degree ``order``; ``complete`` marks that f is
    exactly polynomial (the implicit solve terminated with zero
    residual), which is what certifies infinite vanishing orders.
    """

    poly: ZPoly
    order: int
    complete: bool = False

    def __post_init__(self):
        z0 = (0,) * self.poly.nvars
        if (z0, z0) in self.poly.terms:
            raise ValueError("graph jet must vanish at the origin")


def _as_qc_vector(v) -> list[QC]:
    out = []
    for x in v:
        if isinstance(x, QC):
            out.append(x)
        elif isinstance(x, Fraction):
            out.append(QC(x))
        else:
            out.append(QC.of(complex(x)))
    return out


def ord_vanish(jet: BoundaryJet | ZPoly, v) -> float:
    """Order of vanishing of f(lambda v) at lambda = 0 (INF_TYPE if zero).

    Infinite orders are certified only when the jet is complete;
    otherwise the order is reported as INF_TYPE past the jet cap.
    """
    poly = jet.poly if isinstance(jet, BoundaryJet) else jet
    restricted = poly.restrict_line(_as_qc_vector(v) if poly._exact() else list(v))
    if restricted.is_zero():
        return INF_TYPE
    return restricted.min_total_degree()


# ----------------------------------------------------------------------
# filtration by jump subspaces
# ----------------------------------------------------------------------
def _monomials(k: int, t: int):
    """Multi-indices of total degree t in k variables, lexicographic."""
    out = []
    for combo in combinations_with_replacement(range(k), t):
        gamma = [0] * k
        for i in combo:
            gamma[i] += 1
        out.append(tuple(gamma))
    return out


def _hermitian_block(p: ZPoly, r: int):
    """Matrix of the (t,t) coefficients of the degree-r part, t = r//2."""
    t = r // 2
    mons = _monomials(p.nvars, t)
    index = {g: i for i, g in enumerate(mons)}
    n = len(mons)
    C = [[QC(0) for _ in range(n)] for _ in range(n)]
    for (a, b), c in p.terms.items():
        if sum(a) == t and sum(b) == t:
            C[index[a]][index[b]] = QC.of(c)
    return mons, C


def _zero_subspace(p: ZPoly, r: int):
    """Basis (columns) of {v : all degree-r coefficient forms vanish}.

    Valid for convex non-negative p whose minimal degree is r: the
    Fejer-kernel argument reduces the full system to the Hermitian
    (t,t) block.
    """
    k = p.nvars
    if r % 2 == 1:
        raise ValueError("odd minimal vanishing order contradicts convexity")
    t = r // 2
    mons, C = _hermitian_block(p, r)
    if t == 1:
        ker = exact_kernel(C)
        return [list(vec) for vec in ker]
    # t >= 2: Phi(v) = M(v)^H C M(v) with M the degree-t Veronese map.
    # Resolve coordinate-structured kernels; verify candidates by
    # restriction afterwards.
    nz_rows = set()
    for i, g in enumerate(mons):
        row_nz = any(bool(C[i][j]) or bool(C[j][i]) for j in range(len(mons)))
        if row_nz:
            nz_rows.add(g)
    involved = set()
    for g in nz_rows:
        involved.update(j for j in range(k) if g[j] > 0)
    candidates = [j for j in range(k) if j not in involved]
    basis = []
    for j in candidates:
        vec = [QC(0)] * k
        vec[j] = QC(1)
        basis.append(vec)
    # verify: restriction of the degree-r part to the candidate span is zero
    if basis:
        M = [[basis[c][row] for c in range(len(basis))] for row in range(k)]
        restricted = p.homogeneous_part(r).subs_affine(M, [QC(0)] * k)
        if not restricted.is_zero():
            raise RuntimeError("jump subspace not coordinate-structured; "
                               "unsupported boundary jet")
    return basis


def filtration(jet: BoundaryJet | ZPoly, r_max: int | None = None):
    """Jump chain [(r_i, basis matrix of V_{r_i+1} inside C^k)] plus dims.

    Returns a list of ``(r, dim_before, dim_after, basis)`` entries,
    where ``basis`` maps the next subspace's coordinates into the
    original ones.  The chain validates V_{r+1} subset V_r by
    construction.
    """
    if isinstance(jet, BoundaryJet):
        poly = jet.poly.to_exact()
        cap = jet.order if r_max is None else min(r_max, jet.order)
        complete = jet.complete
    else:
        poly = jet.to_exact()
        cap = r_max if r_max is not None else max(poly.total_degree(), 2)
        complete = True
    k = poly.nvars
    # ambient-coordinate columns of the current subspace
    basis = [[QC(1) if i == j else QC(0) for j in range(k)] for i in range(k)]
    chain = []
    current = poly
    dim = k
    while dim > 0:
        if current.is_zero():
            chain.append((INF_TYPE, dim, 0, None,
                          "exact" if complete else "uncertified"))
            break
        r = current.min_total_degree()
        if r > cap:
            chain.append((INF_TYPE, dim, 0, None,
                          "exact" if complete else "uncertified"))
            break
        ker = _zero_subspace(current, r)
        new_dim = len(ker)
        if new_dim:
            M = [[ker[c][row] for c in range(new_dim)] for row in range(dim)]
            basis = _matmul_qc(basis, M)
            ambient = [[basis[row][c] for row in range(k)] for c in range(new_dim)]
        else:
            ambient = []
        chain.append((r, dim, new_dim, ambient, "exact"))
        if new_dim == 0:
            break
        current = current.subs_affine(M, [QC(0)] * dim)
        dim = new_dim
    return chain


def _matmul_qc(A, B):
    rows = len(A)
    inner = len(B)
    cols = len(B[0]) if inner else 0
    out = [[QC(0) for _ in range(cols)] for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            s = QC(0)
            for l in range(inner):
                s = s + A[i][l] * B[l][j]
            out[i][j] = s
    return out


def type_tuple(jet: BoundaryJet | ZPoly, r_max: int | None = None) -> tuple:
    """Nondecreasing type tuple from the jump chain."""
    chain = filtration(jet, r_max)
    entries = []
    for item in chain:
        r, dim_before, dim_after = item[0], item[1], item[2]
        entries.extend([r] * (dim_before - dim_after))
    nvars = jet.poly.nvars if isinstance(jet, BoundaryJet) else jet.nvars
    while len(entries) < nvars:
        entries.append(INF_TYPE)
    return tuple(entries)


# ----------------------------------------------------------------------
# flattening a boundary point
# ----------------------------------------------------------------------
def _flatten(rho: ZPoly, xi: list[QC], snap: float):
    """Rational affine flattening: xi -> 0, Omega locally {Im w1 > F(x, w)}.

    Returns (rho_tilde, pivot) with rho_tilde in the w coordinates.
    """
    d = rho.nvars
    grads = [rho.dz(j).eval_exact(xi) for j in range(d)]
    a = [g.conjugate() * QC(2) for g in grads]
    mags = [abs(complex(x)) for x in a]
    if max(mags) < 1e-13:
        raise SingularBoundaryPoint("vanishing gradient at boundary point")
    pivot = int(np.argmax(mags))
    # w1 = -i <z - xi, a>, other coordinates are shifted ambient ones
    minus_i = QC(0, -1)
    M = [[QC(0) for _ in range(d)] for _ in range(d)]
    for j in range(d):
        M[0][j] = minus_i * a[j].conjugate()
    row = 1
    for j in range(d):
        if j == pivot:
            continue
        M[row][j] = QC(1)
        row += 1
    Minv = _qc_inverse(M)
    # z = Minv w + xi
    rho_t = rho.to_exact().subs_affine(Minv, xi)
    if snap > 0:
        scale = max((abs(complex(c)) for c in rho_t.terms.values()), default=1.0)
        rho_t = _snap(rho_t, snap * scale)
    return rho_t, pivot


def _qc_inverse(M):
    n = len(M)
    eye = [[QC(1) if i == j else QC(0) for j in range(n)] for i in range(n)]
    return exact_solve(M, eye)


def _snap(p: ZPoly, tol: float) -> ZPoly:
    return ZPoly(p.nvars, {k: c for k, c in p.terms.items()
                           if abs(complex(c)) > tol})


def boundary_jet(domain: ConvexDomain, xi, order: int | None = None,
                 snap: float | None = None) -> BoundaryJet:
    """Graph jet of the boundary at xi, via the implicit function iteration.

    Exact when the defining polynomial is exact and rho(xi) = 0 exactly;
    otherwise coefficients below ``snap`` (relative) are dropped first.
    """
    rho = domain.exact_poly
    if rho is None:
        if domain.defining_poly is None:
            raise ValueError("domain carries no polynomial defining data")
        rho = domain.defining_poly.to_exact()
    xi = _as_qc_vector(xi)
    residual = rho.eval_exact(xi)
    if snap is None:
        snap = 0.0 if not residual else 1e-9
    if abs(complex(residual)) > 1e-7:
        raise ValueError("xi is not a boundary point of the defining set")
    if order is None:
        order = 2 * rho.total_degree() + 2
    rho_t, _ = _flatten(rho, xi, snap)
    d = rho.nvars
    # substitute w1 = i y (x = 0): collect A_k in the tangential variables
    A: dict[int, ZPoly] = {}
    i_unit = QC(0, 1)
    for (a, b), c in rho_t.terms.items():
        k = a[0] + b[0]
        coeff = QC.of(c)
        for _ in range(a[0]):
            coeff = coeff * i_unit
        for _ in range(b[0]):
            coeff = coeff * i_unit.conjugate()
        key = (a[1:], b[1:])
        blk = A.setdefault(k, ZPoly(d - 1))
        cur = blk.terms.get(key)
        new = coeff if cur is None else cur + coeff
        if new:
            blk.terms[key] = new
        else:
            blk.terms.pop(key, None)
    for blk in A.values():
        blk._compiled = None
    # linear normalization guaranteed by the flattening: A_1 constant = -1
    c1 = A.get(1, ZPoly(d - 1)).terms.get(((0,) * (d - 1), (0,) * (d - 1)), QC(0))
    if not c1 or c1.im != 0:
        raise SingularBoundaryPoint("flattening failed to normalize the graph")
    kmax = max(A.keys())
    f = ZPoly(d - 1)
    for _ in range(order + 1):
        total = ZPoly(d - 1)
        f_pow = ZPoly.constant(d - 1, QC(1))
        for k in range(kmax + 1):
            if k in A:
                total = total + (A[k] * f_pow).truncate(order)
            f_pow = (f_pow * f).truncate(order)
        f_new = f - total.scale(QC(1) / c1)
        f_new = f_new.truncate(order)
        if snap > 0:
            fs = max((abs(complex(c)) for c in f_new.terms.values()), default=1.0)
            f_new = _snap(f_new, snap * max(1.0, fs))
        if f_new.terms == f.terms:
            f = f_new
            break
        f = f_new
    # residual without truncation decides completeness
    total = ZPoly(d - 1)
    f_pow = ZPoly.constant(d - 1, QC(1))
    for k in range(kmax + 1):
        if k in A:
            total = total + A[k] * f_pow
        f_pow = f_pow * f
    complete = total.is_zero()
    z0 = (0,) * (d - 1)
    f.terms.pop((z0, z0), None)
    f._compiled = None
    return BoundaryJet(poly=f, order=order, complete=complete)


def line_type_at(domain: ConvexDomain, xi, order: int | None = None) -> tuple:
    """Line type tuple of the boundary point xi (d-1 tangential entries)."""
    jet = boundary_jet(domain, xi, order=order)
    return type_tuple(jet)


def strongly_pseudoconvex(domain: ConvexDomain, xi) -> bool:
    m = line_type_at(domain, xi)
    return all(x == 2 for x in m)


def levi_positive(domain: ConvexDomain, xi) -> bool:
    """Independent check: restricted complex Hessian positive definite on
    the complex tangent space (float eigenvalue computation)."""
    rho = domain.defining_poly
    if rho is None:
        raise ValueError("no defining polynomial")
    xi = np.asarray(xi, dtype=np.complex128)
    d = rho.nvars
    grad = rho.grad_z(xi)
    n = np.conjugate(grad)
    if np.linalg.norm(n) < 1e-12:
        raise SingularBoundaryPoint("vanishing gradient")
    n = n / np.linalg.norm(n)
    # orthonormal basis of the complex tangent {v : <v, n> = 0}
    Q, _ = np.linalg.qr(np.concatenate([n[:, None], np.eye(d, dtype=np.complex128)],
                                       axis=1))
    T = Q[:, 1:d]
    H = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        di = rho.dz(i)
        for j in range(d):
            H[i, j] = di.dzbar(j).eval(xi)
    # Levi value for v = T c is sum_ij H_ij (Tc)_i conj(Tc)_j = c^H M c
    M = np.einsum("ij,ik,jl->lk", H, T, np.conjugate(T))
    evals = np.linalg.eigvalsh(0.5 * (M + np.conjugate(M.T)))
    return bool(np.all(evals > 1e-9))
