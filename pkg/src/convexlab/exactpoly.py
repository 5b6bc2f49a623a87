"""Polynomials in (z, zbar) on C^d with exact or floating coefficients.

Real-valued defining functions of domains (spheres, eggs, polynomial
models) are polynomials in the coordinates and their conjugates.  This
module provides the small algebra needed everywhere else: term-wise
Wirtinger derivatives, composition with complex-affine maps, restriction
to complex lines, and weighted-degree filtering.

Coefficients are either python ``complex`` or :class:`QC` (complex
numbers with ``Fraction`` real/imaginary parts).  All structural
operations (differentiation, substitution, filtering) preserve the
coefficient type, so polynomials built from rational data stay exact
through affine changes of coordinates.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

__all__ = ["QC", "ZPoly", "exact_solve", "exact_inverse", "exact_kernel"]


class QC:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def of(value) -> "QC":
        if isinstance(value, QC):
            return value
        if isinstance(value, complex):
            return QC(Fraction(value.real), Fraction(value.imag))
        return QC(Fraction(value))

    def __add__(self, other):
        o = QC.of(other)
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = QC.of(other)
        return QC(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return QC.of(other) - self

    def __mul__(self, other):
        o = QC.of(other)
        return QC(self.re * o.re - self.im * o.im,
                  self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QC.of(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        return QC((self.re * o.re + self.im * o.im) / den,
                  (self.im * o.re - self.re * o.im) / den)

    def __neg__(self):
        return QC(-self.re, -self.im)

    def conjugate(self) -> "QC":
        return QC(self.re, -self.im)

    def __eq__(self, other):
        o = QC.of(other)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QC({self.re}, {self.im})"

    @property
    def is_real(self) -> bool:
        return self.im == 0


def _conj_coeff(c):
    return c.conjugate()


def _is_zero_coeff(c) -> bool:
    if isinstance(c, QC):
        return not c
    return c == 0


class ZPoly:
    """Polynomial sum_{alpha,beta} c[alpha,beta] * z^alpha * zbar^beta.

    ``terms`` maps ``(alpha, beta)`` (tuples of non-negative ints of
    length ``nvars``) to a coefficient.  Real-valued polynomials carry
    the Hermitian symmetry c[beta,alpha] = conj(c[alpha,beta]).
    """

    __slots__ = ("nvars", "terms", "_compiled")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        self.terms: dict = {}
        self._compiled = None
        if terms:
            for key, c in terms.items():
                if not _is_zero_coeff(c):
                    self.terms[key] = c

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @staticmethod
    def zero(nvars: int) -> "ZPoly":
        return ZPoly(nvars)

    @staticmethod
    def constant(nvars: int, c) -> "ZPoly":
        z0 = (0,) * nvars
        return ZPoly(nvars, {(z0, z0): c})

    @staticmethod
    def variable(nvars: int, j: int, conj: bool = False) -> "ZPoly":
        a = [0] * nvars
        a[j] = 1
        a = tuple(a)
        z0 = (0,) * nvars
        key = (z0, a) if conj else (a, z0)
        return ZPoly(nvars, {key: 1})

    @staticmethod
    def abs2(nvars: int, j: int, power: int = 1) -> "ZPoly":
        """|z_j|^(2*power) as an exact integer-coefficient polynomial."""
        a = [0] * nvars
        a[j] = power
        a = tuple(a)
        return ZPoly(nvars, {(a, a): 1})

    # ------------------------------------------------------------------
    # ring operations
    # ------------------------------------------------------------------
    def _binary(self, other, sign) -> "ZPoly":
        out = dict(self.terms)
        for key, c in other.terms.items():
            cur = out.get(key)
            new = c * sign if cur is None else cur + c * sign
            if _is_zero_coeff(new):
                out.pop(key, None)
            else:
                out[key] = new
        return ZPoly(self.nvars, out)

    def __add__(self, other):
        if not isinstance(other, ZPoly):
            other = ZPoly.constant(self.nvars, other)
        return self._binary(other, 1)

    def __sub__(self, other):
        if not isinstance(other, ZPoly):
            other = ZPoly.constant(self.nvars, other)
        return self._binary(other, -1)

    def __neg__(self):
        return ZPoly(self.nvars, {k: -c for k, c in self.terms.items()})

    def scale(self, s) -> "ZPoly":
        if _is_zero_coeff(s):
            return ZPoly(self.nvars)
        return ZPoly(self.nvars, {k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ZPoly):
            return self.scale(other)
        out: dict = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (tuple(x + y for x, y in zip(a1, a2)),
                       tuple(x + y for x, y in zip(b1, b2)))
                cur = out.get(key)
                new = c1 * c2 if cur is None else cur + c1 * c2
                if _is_zero_coeff(new):
                    out.pop(key, None)
                else:
                    out[key] = new
        return ZPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ZPoly":
        if n < 0:
            raise ValueError("negative power")
        result = ZPoly.constant(self.nvars, 1 if not self._exact() else QC(1))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def conjugate(self) -> "ZPoly":
        return ZPoly(self.nvars,
                     {(b, a): _conj_coeff(c) for (a, b), c in self.terms.items()})

    # ------------------------------------------------------------------
    # calculus
    # ------------------------------------------------------------------
    def dz(self, j: int) -> "ZPoly":
        out = {}
        for (a, b), c in self.terms.items():
            if a[j] == 0:
                continue
            na = list(a)
            na[j] -= 1
            out[(tuple(na), b)] = c * a[j]
        return ZPoly(self.nvars, out)

    def dzbar(self, j: int) -> "ZPoly":
        out = {}
        for (a, b), c in self.terms.items():
            if b[j] == 0:
                continue
            nb = list(b)
            nb[j] -= 1
            out[(a, tuple(nb))] = c * b[j]
        return ZPoly(self.nvars, out)

    # ------------------------------------------------------------------
    # degree bookkeeping
    # ------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(a) + sum(b) for a, b in self.terms)

    def min_total_degree(self) -> int:
        if not self.terms:
            return -1
        return min(sum(a) + sum(b) for a, b in self.terms)

    def truncate(self, max_degree: int) -> "ZPoly":
        return ZPoly(self.nvars,
                     {k: c for k, c in self.terms.items()
                      if sum(k[0]) + sum(k[1]) <= max_degree})

    def homogeneous_part(self, degree: int) -> "ZPoly":
        return ZPoly(self.nvars,
                     {k: c for k, c in self.terms.items()
                      if sum(k[0]) + sum(k[1]) == degree})

    def weighted_part(self, weights: Iterable[Fraction], weight: Fraction) -> "ZPoly":
        """Terms whose exact weighted degree sum((a_j+b_j)*w_j) equals ``weight``."""
        w = list(weights)
        out = {}
        for (a, b), c in self.terms.items():
            deg = sum((ai + bi) * wi for ai, bi, wi in zip(a, b, w))
            if deg == weight:
                out[(a, b)] = c
        return ZPoly(self.nvars, out)

    # ------------------------------------------------------------------
    # substitution
    # ------------------------------------------------------------------
    def subs_affine(self, M, b) -> "ZPoly":
        """Substitute z = M w + b (and zbar = conj), returning a ZPoly in w.

        ``M`` is a nested list/array (nvars x nout), ``b`` a list of length
        nvars; entries may be QC (exact path) or complex.
        """
        nout = len(M[0]) if self.nvars else 0
        lin = []
        for j in range(self.nvars):
            terms = {}
            z0 = (0,) * nout
            if not _is_zero_coeff(b[j]):
                terms[(z0, z0)] = b[j]
            for k in range(nout):
                if _is_zero_coeff(M[j][k]):
                    continue
                a = [0] * nout
                a[k] = 1
                terms[(tuple(a), z0)] = M[j][k]
            lin.append(ZPoly(nout, terms))
        lin_conj = [p.conjugate() for p in lin]

        pow_cache: dict = {}

        def powered(polys, j, n):
            key = (id(polys), j, n)
            if key not in pow_cache:
                pow_cache[key] = polys[j] ** n
            return pow_cache[key]

        out = ZPoly(nout)
        for (a, bb), c in self.terms.items():
            term = ZPoly.constant(nout, c)
            for j in range(self.nvars):
                if a[j]:
                    term = term * powered(lin, j, a[j])
                if bb[j]:
                    term = term * powered(lin_conj, j, bb[j])
            out = out + term
        return out

    def restrict_line(self, v) -> "ZPoly":
        """p(lambda * v) as a 1-variable polynomial in (lambda, lambdabar)."""
        # v^alpha vbar^beta coefficients; v entries QC or complex
        vc = [x.conjugate() if isinstance(x, QC) else np.conjugate(x) for x in v]
        out: dict = {}
        for (a, b), c in self.terms.items():
            f = c
            skip = False
            for j in range(self.nvars):
                for _ in range(a[j]):
                    f = f * v[j]
                for _ in range(b[j]):
                    f = f * vc[j]
                if _is_zero_coeff(f):
                    skip = True
                    break
            if skip:
                continue
            key = ((sum(a),), (sum(b),))
            cur = out.get(key)
            new = f if cur is None else cur + f
            if _is_zero_coeff(new):
                out.pop(key, None)
            else:
                out[key] = new
        return ZPoly(1, out)

    # ------------------------------------------------------------------
    # coefficient type conversion
    # ------------------------------------------------------------------
    def _exact(self) -> bool:
        for c in self.terms.values():
            return isinstance(c, QC)
        return False

    def to_float(self) -> "ZPoly":
        return ZPoly(self.nvars, {k: complex(c) for k, c in self.terms.items()})

    def to_exact(self) -> "ZPoly":
        return ZPoly(self.nvars, {k: QC.of(c) for k, c in self.terms.items()})

    def prune(self, tol: float) -> "ZPoly":
        return ZPoly(self.nvars,
                     {k: c for k, c in self.terms.items() if abs(complex(c)) > tol})

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def _compile(self):
        if self._compiled is None:
            keys = sorted(self.terms.keys())
            alphas = np.array([k[0] for k in keys], dtype=np.int64).reshape(len(keys), self.nvars)
            betas = np.array([k[1] for k in keys], dtype=np.int64).reshape(len(keys), self.nvars)
            coeffs = np.array([complex(self.terms[k]) for k in keys], dtype=np.complex128)
            self._compiled = (alphas, betas, coeffs)
        return self._compiled

    def eval(self, Z) -> np.ndarray:
        """Evaluate at points Z of shape (..., nvars); returns complex array."""
        Z = np.asarray(Z, dtype=np.complex128)
        single = Z.ndim == 1
        pts = Z.reshape(-1, self.nvars)
        if not self.terms:
            vals = np.zeros(len(pts), dtype=np.complex128)
        else:
            alphas, betas, coeffs = self._compile()
            # (npts, nterms, nvars) power tables; term counts are modest
            za = pts[:, None, :] ** alphas[None, :, :]
            zb = np.conjugate(pts)[:, None, :] ** betas[None, :, :]
            vals = (za.prod(axis=2) * zb.prod(axis=2)) @ coeffs
        return vals[0] if single else vals.reshape(Z.shape[:-1])

    def eval_real(self, Z) -> np.ndarray:
        return np.real(self.eval(Z))

    def eval_exact(self, v) -> QC:
        """Exact evaluation at a point with QC entries."""
        total = QC(0)
        vc = [x.conjugate() for x in v]
        for (a, b), c in self.terms.items():
            f = QC.of(c)
            for j in range(self.nvars):
                for _ in range(a[j]):
                    f = f * v[j]
                for _ in range(b[j]):
                    f = f * vc[j]
            total = total + f
        return total

    # ------------------------------------------------------------------
    def grad_z(self, z) -> np.ndarray:
        """Holomorphic gradient (d p / d z_j) at a point."""
        return np.array([self.dz(j).eval(z) for j in range(self.nvars)],
                        dtype=np.complex128)

    def real_hessian(self, z) -> np.ndarray:
        """Real 2d x 2d Hessian at z, coordinates (x_1..x_d, y_1..y_d)."""
        d = self.nvars
        A = np.zeros((d, d), dtype=np.complex128)
        B = np.zeros((d, d), dtype=np.complex128)
        for i in range(d):
            pi = self.dz(i)
            for j in range(d):
                A[i, j] = pi.dz(j).eval(z)
                B[i, j] = pi.dzbar(j).eval(z)
        H = np.zeros((2 * d, 2 * d))
        Hxx = 2 * np.real(A) + 2 * np.real(B)
        Hyy = -2 * np.real(A) + 2 * np.real(B)
        Hxy = -2 * np.imag(A) + 2 * np.imag(B)
        H[:d, :d] = Hxx
        H[d:, d:] = Hyy
        H[:d, d:] = Hxy
        H[d:, :d] = Hxy.T
        return H

    def is_hermitian_symmetric(self, tol: float = 0.0) -> bool:
        for (a, b), c in self.terms.items():
            cc = self.terms.get((b, a))
            if cc is None:
                return False
            diff = complex(cc) - complex(_conj_coeff(c))
            if abs(diff) > tol:
                return False
        return True

    def __repr__(self):
        n = len(self.terms)
        return f"ZPoly(nvars={self.nvars}, nterms={n}, deg={self.total_degree()})"


# ----------------------------------------------------------------------
# exact linear algebra over QC (small systems only)
# ----------------------------------------------------------------------
def exact_solve(M: list[list[QC]], rhs: list[list[QC]]) -> list[list[QC]]:
    """Solve M X = rhs by Gaussian elimination over QC, exactly."""
    n = len(M)
    m = len(rhs[0])
    A = [[QC.of(M[i][j]) for j in range(n)] + [QC.of(rhs[i][j]) for j in range(m)]
         for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if A[r][col]:
                piv = r
                break
        if piv is None:
            raise ValueError("singular exact system")
        A[col], A[piv] = A[piv], A[col]
        inv = QC(1) / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [[A[i][n + j] for j in range(m)] for i in range(n)]


def exact_inverse(M: list[list[QC]]) -> list[list[QC]]:
    n = len(M)
    eye = [[QC(1) if i == j else QC(0) for j in range(n)] for i in range(n)]
    return exact_solve(M, eye)


def exact_kernel(M: list[list[QC]]) -> list[list[QC]]:
    """Basis of the kernel of a (possibly rectangular) QC matrix."""
    if not M:
        return []
    rows = len(M)
    cols = len(M[0])
    A = [[QC.of(M[i][j]) for j in range(cols)] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for rr in range(r, rows):
            if A[rr][c]:
                piv = rr
                break
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = QC(1) / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for rr in range(rows):
            if rr != r and A[rr][c]:
                f = A[rr][c]
                A[rr] = [x - f * y for x, y in zip(A[rr], A[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [QC(0)] * cols
        vec[fc] = QC(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -A[i][fc]
        basis.append(vec)
    return basis
