"""Truncated monomial Bergman kernels, metric jets, and curvature.

On a bounded complete Reinhardt convex domain the monomials are L^2
orthogonal, so the kernel diagonal is kappa(z,z) = sum c_a |z^a|^2 with
c_a = 1 / ||z^a||^2.  Norms reduce to products of one-dimensional
integrals: for the egg family { sum |z_i|^(2 k_i) < 1 } the recursive
substitution r_i = t_i * (1 - sum_{j<i} r_j^(2k_j))^(1/(2k_i)) separates
the shadow integral into factors

    Q(a, p, k) = int_0^1 t^a (1 - t^(2k))^p dt,

evaluated by adaptive quadrature with algebraic endpoint weights
(default) or by the log-gamma closed form (used as the cross-check
oracle in the tests, and as the coefficient backend for the very large
anisotropic caps needed near the boundary, where running tens of
thousands of quadratures would be pointless).

Metric and curvature never use numerical differentiation: kernel
derivatives are exact term-wise sums, and derivatives of log(kappa)
come from the moment/cumulant expansion over set partitions.  The
curvature normalization constant is calibrated once on the unit disc
and reused verbatim in every dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import gammaln

from .domains import Ball, ConvexDomain, Egg

__all__ = ["MonomialKernel", "MetricJet", "CurvatureReport", "monomial_norms",
           "kernel_diag", "metric_jet", "hol_sect_curvature",
           "curvature_constant", "curvature_pinch", "bounded_geometry_estimate",
           "TailError", "save_kernel", "load_kernel"]


class TailError(RuntimeError):
    """Truncation tail too large at the requested point; increase caps."""


# ----------------------------------------------------------------------
# coefficient construction
# ----------------------------------------------------------------------
def _reinhardt_exponents(domain: ConvexDomain):
    if isinstance(domain, Ball):
        if np.any(domain.center != 0) or abs(domain.radius - 1.0) > 0:
            raise ValueError("monomial kernels need the unit ball at the origin")
        return (1,) * domain.dim
    if isinstance(domain, Egg):
        if domain.level != 1:
            raise ValueError("monomial kernels need unit-level egg domains")
        return domain.exponents
    raise ValueError("domain is not a supported complete Reinhardt family")


@lru_cache(maxsize=200000)
def _q_quad(a: int, p_num: int, p_den: int, k: int):
    """Q(a,p,k) by QUADPACK with algebraic endpoint weights, with error."""
    from scipy.integrate import quad
    p = p_num / p_den
    s = (a + 1) / (2 * k)
    # int_0^1 u^(s-1) (1-u)^p du / (2k)
    val, err = quad(lambda u: 1.0, 0.0, 1.0, weight="alg", wvar=(s - 1.0, p),
                    epsabs=1e-13, epsrel=1e-12, limit=200)
    return val / (2 * k), err / (2 * k)


def _q_closed(a, p, k):
    s = (a + 1.0) / (2.0 * k)
    return np.exp(gammaln(s) + gammaln(p + 1.0) - gammaln(s + p + 1.0)) / (2.0 * k)


@dataclass
class MonomialKernel:
    exponents: tuple              # Reinhardt family exponents k_i
    alphas: np.ndarray            # (T, d) multi-indices
    coeffs: np.ndarray            # (T,) c_alpha > 0
    uncert: np.ndarray            # (T,) absolute coefficient uncertainty
    caps: tuple                   # per-coordinate caps
    total_cap: int
    backend: str

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def degree_sums(self, z) -> np.ndarray:
        """Per-total-degree sums of c_a |z^a|^2 (tail diagnostics)."""
        z = np.asarray(z, dtype=np.complex128)
        mods = np.abs(z[None, :]) ** (2 * self.alphas)
        terms = self.coeffs * mods.prod(axis=1)
        degs = self.alphas.sum(axis=1)
        out = np.zeros(int(degs.max()) + 1)
        np.add.at(out, degs, terms)
        return out


def monomial_norms(domain: ConvexDomain, N: int, caps=None,
                   backend: str = "auto") -> MonomialKernel:
    """Kernel coefficients c_alpha = 1 / ||z^alpha||^2 for |alpha| <= N.

    ``caps`` optionally bounds each exponent separately (anisotropic
    truncation for points close to a coordinate axis).  ``backend`` is
    "quadrature", "closed", or "auto" (quadrature up to 4000
    coefficients, closed form beyond).
    """
    ks = _reinhardt_exponents(domain)
    d = len(ks)
    if N < 2 * d:
        raise ValueError("degree cap too small")
    if caps is None:
        caps = (N,) * d
    alphas = _enumerate_alphas(caps, N)
    T = len(alphas)
    if backend == "auto":
        backend = "quadrature" if T <= 4000 else "closed"
    lognorm = np.zeros(T)
    relerr = np.zeros(T)
    log2pi = d * math.log(2.0 * math.pi)
    for j in range(d):
        a = 2 * alphas[:, j] + 1
        if backend == "closed":
            frac = np.zeros(T)
            for i in range(j + 1, d):
                frac = frac + (alphas[:, i] + 1) / ks[i]
            q = _q_closed(a, frac, ks[j])
            lognorm += np.log(q)
            relerr += 1e-14
        else:
            # p_j = sum_{i>j} (alpha_i + 1) / k_i as exact fractions
            for t in range(T):
                p = Fraction(0)
                for i in range(j + 1, d):
                    p += Fraction(int(alphas[t, i]) + 1, ks[i])
                val, err = _q_quad(int(a[t]), p.numerator, p.denominator, ks[j])
                lognorm[t] += math.log(val)
                relerr[t] += err / max(val, 1e-300)
    norms = np.exp(lognorm + log2pi)
    coeffs = 1.0 / norms
    uncert = coeffs * relerr
    return MonomialKernel(exponents=ks, alphas=alphas, coeffs=coeffs,
                          uncert=uncert, caps=tuple(caps), total_cap=N,
                          backend=backend)


def _enumerate_alphas(caps, N) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(c + 1) for c in caps], indexing="ij")
    A = np.stack([g.ravel() for g in grids], axis=1)
    A = A[A.sum(axis=1) <= N]
    order = np.lexsort(tuple(A.T[::-1]))
    return A[order]


def save_kernel(kernel: MonomialKernel, path: str):
    with open(path, "w") as fh:
        for a, c, u in zip(kernel.alphas, kernel.coeffs, kernel.uncert):
            fh.write(" ".join(str(int(x)) for x in a) + f" {c!r} {u!r}\n")


def load_kernel(path: str, exponents) -> MonomialKernel:
    alphas, coeffs, uncert = [], [], []
    d = len(exponents)
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            alphas.append([int(x) for x in parts[:d]])
            coeffs.append(float(parts[d]))
            uncert.append(float(parts[d + 1]))
    A = np.array(alphas, dtype=np.int64)
    return MonomialKernel(exponents=tuple(exponents), alphas=A,
                          coeffs=np.array(coeffs), uncert=np.array(uncert),
                          caps=tuple(A.max(axis=0)), total_cap=int(A.sum(axis=1).max()),
                          backend="file")


# ----------------------------------------------------------------------
# kernel evaluation and tail control
# ----------------------------------------------------------------------
def kernel_diag(kernel: MonomialKernel, z, tail_limit: float = 0.01):
    """(kappa_N(z,z), tail estimate) with geometric-domination tail bound.

    Raises TailError when the estimated relative tail exceeds
    ``tail_limit``.
    """
    z = np.asarray(z, dtype=np.complex128)
    sums = kernel.degree_sums(z)
    total = float(sums.sum())
    tail = _tail_estimate(sums)
    if tail > tail_limit * total:
        raise TailError(f"relative tail {tail / max(total, 1e-300):.2e}")
    return total, tail


def _tail_estimate(sums: np.ndarray) -> float:
    nz = np.nonzero(sums > 0)[0]
    if len(nz) < 4:
        return 0.0
    last = sums[nz[-4:]]
    ratios = last[1:] / last[:-1]
    rho = float(np.max(ratios))
    if rho >= 1.0:
        return float(np.inf)
    return float(last[-1] * rho / (1.0 - rho))


# ----------------------------------------------------------------------
# metric jet via moment/cumulant calculus
# ----------------------------------------------------------------------
class _LogDerivatives:
    """Derivatives of log kappa at a point from term-wise kernel moments.

    Words are tuples of ('h', i) / ('a', j) items; values come from the
    cumulant expansion over set partitions of the word.
    """

    def __init__(self, kernel: MonomialKernel, z):
        self.kernel = kernel
        self.z = np.asarray(z, dtype=np.complex128)
        d = kernel.dim
        amax = kernel.alphas.max(axis=0)
        self._pow = [self.z[j] ** np.arange(amax[j] + 1) for j in range(d)]
        self._cpow = [np.conjugate(self.z[j]) ** np.arange(amax[j] + 1)
                      for j in range(d)]
        self._moments: dict = {}
        self._words: dict = {}
        self.kappa = float(np.real(self._raw((), ())))

    def _raw(self, S: tuple, T: tuple) -> complex:
        key = (S, T)
        if key in self._moments:
            return self._moments[key]
        ker = self.kernel
        A = ker.alphas
        d = ker.dim
        s_cnt = np.zeros(d, dtype=np.int64)
        for i in S:
            s_cnt[i] += 1
        t_cnt = np.zeros(d, dtype=np.int64)
        for j in T:
            t_cnt[j] += 1
        ff = np.ones(len(A))
        for j in range(d):
            for m in range(s_cnt[j]):
                ff = ff * np.maximum(A[:, j] - m, 0)
            for m in range(t_cnt[j]):
                ff = ff * np.maximum(A[:, j] - m, 0)
        live = ff > 0
        val = 0.0 + 0.0j
        if live.any():
            Al = A[live]
            term = ker.coeffs[live] * ff[live]
            zpart = np.ones(live.sum(), dtype=np.complex128)
            for j in range(d):
                zpart = zpart * self._pow[j][Al[:, j] - s_cnt[j]]
                zpart = zpart * self._cpow[j][Al[:, j] - t_cnt[j]]
            val = complex(np.sum(term * zpart))
        self._moments[key] = val
        return val

    def moment(self, word: tuple) -> complex:
        S = tuple(sorted(i for kind, i in word if kind == "h"))
        T = tuple(sorted(j for kind, j in word if kind == "a"))
        return self._raw(S, T) / self.kappa

    def log_word(self, word: tuple) -> complex:
        word = tuple(word)
        if word in self._words:
            return self._words[word]
        total = 0.0 + 0.0j
        for part in _set_partitions(list(range(len(word)))):
            prod = 1.0 + 0.0j
            for block in part:
                prod *= self.moment(tuple(word[i] for i in block))
            total += (-1.0) ** (len(part) - 1) * math.factorial(len(part) - 1) * prod
        self._words[word] = total
        return total


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


@dataclass
class MetricJet:
    """Bergman metric data at a point: g, first and mixed second derivatives."""

    z: np.ndarray
    g: np.ndarray                 # (d, d): g[i, j] = g_{i jbar}
    dg: np.ndarray                # (d, d, d): dg[k, i, j] = d_k g_{i jbar}
    ddg: np.ndarray               # (d, d, d, d): ddg[k, l, i, j] = d_k d_lbar g_{i jbar}
    kappa: float
    logderiv: _LogDerivatives = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return len(self.z)

    def norm_b(self, v) -> float:
        v = np.asarray(v, dtype=np.complex128)
        return float(np.sqrt(np.real(np.conjugate(v) @ self.g.T @ v)))


def metric_jet(kernel: MonomialKernel, z, tail_limit: float = 0.01) -> MetricJet:
    """Metric and curvature-ready derivatives of log kappa at z.

    All derivatives are assembled from exact term-wise kernel moments;
    Kahler symmetry and positivity are the caller's cross-checks.
    """
    kernel_diag(kernel, z, tail_limit=tail_limit)  # tail gate
    ld = _LogDerivatives(kernel, z)
    d = kernel.dim
    if not ld.kappa > 0:
        raise ValueError("kernel positivity floor violated")
    g = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            g[i, j] = ld.log_word((("h", i), ("a", j)))
    dg = np.zeros((d, d, d), dtype=np.complex128)
    for k in range(d):
        for i in range(d):
            for j in range(d):
                dg[k, i, j] = ld.log_word((("h", i), ("h", k), ("a", j)))
    ddg = np.zeros((d, d, d, d), dtype=np.complex128)
    for k in range(d):
        for l in range(d):
            for i in range(d):
                for j in range(d):
                    ddg[k, l, i, j] = ld.log_word(
                        (("h", i), ("h", k), ("a", j), ("a", l)))
    return MetricJet(z=np.asarray(z, dtype=np.complex128), g=g, dg=dg, ddg=ddg,
                     kappa=ld.kappa, logderiv=ld)


# ----------------------------------------------------------------------
# holomorphic sectional curvature
# ----------------------------------------------------------------------
_CALIBRATION: dict = {}


def _raw_curvature(jet: MetricJet, v) -> float:
    """Uncalibrated R(v, vbar, v, vbar) / g(v, v)^2.

    R_{i jbar k lbar} = -d_k d_lbar g_{i jbar}
                        + g^{p qbar} (d_k g_{i qbar}) (d_lbar g_{p jbar}),
    where g^{p qbar} g_{s qbar} = delta_{ps}, i.e. the matrix conj(G^{-1}).
    """
    v = np.asarray(v, dtype=np.complex128)
    vb = np.conjugate(v)
    num = -np.einsum("klij,i,j,k,l->", jet.ddg, v, vb, v, vb)
    A = np.einsum("kiq,i,k->q", jet.dg, v, v)              # d_k g_{i qbar} v^i v^k
    # d_lbar g_{p jbar} = conj(d_l g_{j pbar})
    B = np.einsum("ljp,j,l->p", np.conjugate(jet.dg), vb, vb)
    P = np.conjugate(np.linalg.inv(jet.g))
    num += np.einsum("q,p,pq->", A, B, P)
    den = np.real(np.einsum("ij,i,j->", jet.g, v, vb)) ** 2
    return float(np.real(num) / den)


def curvature_constant(N: int = 40) -> float:
    """Normalization fixed once on the unit disc: curvature there is -2."""
    if N not in _CALIBRATION:
        kernel = monomial_norms(Ball(1), N)
        jet = metric_jet(kernel, np.zeros(1))
        raw = _raw_curvature(jet, np.ones(1))
        _CALIBRATION[N] = -2.0 / raw
    return _CALIBRATION[N]


def hol_sect_curvature(jet: MetricJet, v, c0: float | None = None) -> float:
    """Holomorphic sectional curvature of the truncated Bergman metric."""
    v = np.asarray(v, dtype=np.complex128)
    if np.linalg.norm(v) == 0:
        raise ValueError("direction must be nonzero")
    if c0 is None:
        c0 = curvature_constant()
    return c0 * _raw_curvature(jet, v)


@dataclass
class CurvatureReport:
    point: np.ndarray
    values: np.ndarray
    h_min: float
    h_max: float
    pinch: float
    deviation: float


def curvature_at(kernel: MonomialKernel, z, n_dirs: int = 64,
                 seed: int = 0, tail_limit: float = 0.01) -> CurvatureReport:
    """Curvature sweep over a direction net at a single point."""
    from .nets import DirectionNet

    jet = metric_jet(kernel, z, tail_limit=tail_limit)
    net = DirectionNet.standard(kernel.dim, n_dirs, seed=seed)
    c0 = curvature_constant()
    vals = np.array([c0 * _raw_curvature(jet, v) for v in net.directions])
    d = kernel.dim
    target = -4.0 / (d + 1.0)
    return CurvatureReport(point=np.asarray(z, np.complex128), values=vals,
                           h_min=float(vals.min()), h_max=float(vals.max()),
                           pinch=float(vals.max() - vals.min()),
                           deviation=float(np.max(np.abs(vals - target))))


def curvature_pinch(kernel: MonomialKernel, domain: ConvexDomain, x,
                    radius: float, n_dirs: int = 48, n_samples: int = 48,
                    seed: int = 0, tail_limit: float = 0.01) -> CurvatureReport:
    """Curvature variation over the inner cloud of a Kobayashi ball.

    Reports the sup over usable sample points of max|H(v) - H(w)| and of
    the deviation |H + 4/(d+1)|; sample points whose kernel tail fails
    the gate are skipped (the report counts them).
    """
    from .kobayashi import kob_ball

    cloud = kob_ball(domain, x, radius, n_samples=n_samples, seed=seed)
    pts = [np.asarray(x, np.complex128)] + list(cloud.inner)
    pinch = 0.0
    deviation = 0.0
    values = []
    used = 0
    for p in pts:
        try:
            rep = curvature_at(kernel, p, n_dirs=n_dirs, seed=seed,
                               tail_limit=tail_limit)
        except TailError:
            continue
        used += 1
        values.append(rep.values)
        pinch = max(pinch, rep.pinch)
        deviation = max(deviation, rep.deviation)
    if used == 0:
        raise TailError("no sample point passed the kernel tail gate")
    return CurvatureReport(point=np.asarray(x, np.complex128),
                           values=np.concatenate(values),
                           h_min=float(min(v.min() for v in values)),
                           h_max=float(max(v.max() for v in values)),
                           pinch=float(pinch), deviation=float(deviation))


# ----------------------------------------------------------------------
# bounded geometry estimates
# ----------------------------------------------------------------------
def bounded_geometry_estimate(domain: ConvexDomain, kernel: MonomialKernel,
                              points, n_dirs: int = 12, n_pairs: int = 24,
                              seed: int = 0) -> dict:
    """Sampled ratios for the bounded-geometry conditions.

    Condition 2 compares the Bergman norm with the metric upper bound
    (exact for the ball at the center); conditions 3-5 bound derivative
    ratios with metric lower bounds in the denominators, so the reported
    M errs on the large side.  Condition 5 divides by the Kobayashi
    distance upper bound.
    """
    from .kobayashi import kob_metric_bounds_many, kob_distance_bounds_many

    rng = np.random.default_rng(seed)
    d = domain.dim
    pts = [np.asarray(p, np.complex128) for p in points]
    dirs = rng.standard_normal((n_dirs, d)) + 1j * rng.standard_normal((n_dirs, d))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    jets = {tuple(np.round(p, 12)): metric_jet(kernel, p) for p in pts}

    c2 = 0.0
    c3 = 0.0
    c4 = 0.0
    samples = {"points": len(pts), "dirs": n_dirs, "pairs": 0}
    for p in pts:
        jet = jets[tuple(np.round(p, 12))]
        Z = np.broadcast_to(p, dirs.shape)
        lo, up = kob_metric_bounds_many(domain, Z, dirs)
        for i, v in enumerate(dirs):
            nb = jet.norm_b(v)
            if up[i] > 0:
                c2 = max(c2, nb / up[i], up[i] / nb)
            for j, w in enumerate(dirs[:4]):
                for k, X in enumerate(dirs[:4]):
                    val = _x_of_g(jet, X, v, w)
                    den = max(lo[k] * lo[i] * lo[j], 1e-300)
                    c3 = max(c3, abs(val) / den)
                    for l, Y in enumerate(dirs[:3]):
                        val4 = _yx_of_g(jet, Y, X, v, w)
                        den4 = max(lo[l] * lo[k] * lo[i] * lo[j], 1e-300)
                        c4 = max(c4, abs(val4) / den4)
    c5 = 0.0
    if len(pts) >= 2:
        idx = rng.integers(0, len(pts), size=(n_pairs, 2))
        idx = idx[idx[:, 0] != idx[:, 1]]
        samples["pairs"] = len(idx)
        X1 = np.array([pts[i] for i in idx[:, 0]])
        X2 = np.array([pts[i] for i in idx[:, 1]])
        dlo, dup = kob_distance_bounds_many(domain, X1, X2)
        for row, (i1, i2) in enumerate(idx):
            j1 = jets[tuple(np.round(pts[i1], 12))]
            j2 = jets[tuple(np.round(pts[i2], 12))]
            v, w, X, Y = dirs[0], dirs[1 % n_dirs], dirs[2 % n_dirs], dirs[3 % n_dirs]
            diff = abs(_yx_of_g(j1, Y, X, v, w) - _yx_of_g(j2, Y, X, v, w))
            Z = np.broadcast_to(pts[i1], (4, d))
            lo, _ = kob_metric_bounds_many(domain, Z, np.stack([Y, X, v, w]))
            den = max(float(np.prod(lo)) * max(dup[row], 1e-300), 1e-300)
            c5 = max(c5, diff / den)
    M = max(c2, c3, c4, c5)
    return {"C0": c2, "cond3": c3, "cond4": c4, "cond5": c5, "M": M,
            "samples": samples}


def _x_of_g(jet: MetricJet, X, v, w) -> complex:
    """Directional derivative X(g(v, w)) along the real direction X."""
    ld = jet.logderiv
    d = jet.dim
    v = np.asarray(v, np.complex128)
    wb = np.conjugate(np.asarray(w, np.complex128))
    X = np.asarray(X, np.complex128)
    total = 0.0 + 0.0j
    for k in range(d):
        for i in range(d):
            for j in range(d):
                c = v[i] * wb[j]
                total += c * X[k] * jet.dg[k, i, j]
                total += c * np.conjugate(X[k]) * ld.log_word(
                    (("h", i), ("a", j), ("a", k)))
    return complex(total)


def _yx_of_g(jet: MetricJet, Y, X, v, w) -> complex:
    """Y(X(g(v, w))) for real directions via the log-derivative words."""
    ld = jet.logderiv
    d = jet.dim
    v = np.asarray(v, np.complex128)
    wb = np.conjugate(np.asarray(w, np.complex128))
    total = 0.0 + 0.0j
    for k in range(d):
        for l in range(d):
            for i in range(d):
                for j in range(d):
                    coeff = v[i] * wb[j]
                    hh = ld.log_word((("h", i), ("h", k), ("h", l), ("a", j)))
                    ha = ld.log_word((("h", i), ("h", k), ("a", j), ("a", l)))
                    ah = ld.log_word((("h", i), ("h", l), ("a", j), ("a", k)))
                    aa = ld.log_word((("h", i), ("a", j), ("a", k), ("a", l)))
                    total += coeff * (X[k] * Y[l] * hh + X[k] * np.conjugate(Y[l]) * ha
                                      + np.conjugate(X[k]) * Y[l] * ah
                                      + np.conjugate(X[k]) * np.conjugate(Y[l]) * aa)
    return complex(total)