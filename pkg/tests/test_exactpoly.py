"""Exact polynomial algebra: arithmetic, calculus, substitution."""

from fractions import Fraction

import numpy as np

from convexlab.exactpoly import QC, ZPoly, exact_inverse, exact_kernel


def test_qc_arithmetic():
    a = QC(Fraction(1, 2), Fraction(1, 3))
    b = QC(2, -1)
    assert (a * b).re == Fraction(4, 3)
    assert (a * b).im == Fraction(1, 6)
    assert complex(a / a) == 1
    assert a.conjugate().im == -Fraction(1, 3)
    assert QC.of(0.5).re == Fraction(1, 2)  # dyadic floats are exact


def test_zpoly_eval_matches_direct():
    # p = |z1|^2 + 2 Re(z1 conj(z2))
    d = 2
    p = ZPoly.abs2(d, 0)
    z1 = ZPoly.variable(d, 0)
    z2 = ZPoly.variable(d, 1)
    p = p + z1 * z2.conjugate() + z2 * z1.conjugate()
    z = np.array([0.3 + 0.4j, -0.2 + 0.1j])
    expected = abs(z[0]) ** 2 + 2 * np.real(z[0] * np.conj(z[1]))
    assert abs(p.eval(z) - expected) < 1e-14


def test_derivatives_term_wise():
    p = ZPoly.abs2(1, 0, 2)  # |z|^4 = z^2 zbar^2
    dz = p.dz(0)
    assert dz.terms == {((1,), (2,)): 2}
    dzz = dz.dzbar(0)
    assert dzz.terms == {((1,), (1,)): 4}


def test_subs_affine_exact_round_trip():
    d = 2
    p = ZPoly.abs2(d, 0) + ZPoly.abs2(d, 1, 2)
    M = [[QC(0, 1), QC(1)], [QC(1, -1), QC(Fraction(1, 2))]]
    b = [QC(Fraction(1, 3)), QC(0, Fraction(2, 5))]
    q = p.to_exact().subs_affine(M, b)
    Minv = exact_inverse(M)
    bneg = [QC(0) - (Minv[0][0] * b[0] + Minv[0][1] * b[1]),
            QC(0) - (Minv[1][0] * b[0] + Minv[1][1] * b[1])]
    back = q.subs_affine(Minv, bneg)
    assert back.terms == p.to_exact().terms


def test_restrict_line_orders():
    p = ZPoly.abs2(2, 0) + ZPoly.abs2(2, 1, 2)
    r = p.to_exact().restrict_line([QC(0), QC(1)])
    assert r.min_total_degree() == 4
    r2 = p.to_exact().restrict_line([QC(1), QC(1)])
    assert r2.min_total_degree() == 2


def test_real_hessian_matches_finite_differences(rng):
    d = 2
    p = (ZPoly.abs2(d, 0) + ZPoly.abs2(d, 1, 2)).to_float()
    z = np.array([0.21 + 0.13j, -0.32 + 0.41j])
    H = p.real_hessian(z)
    h = 1e-5

    def as_real(v):
        return p.eval_real(np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]]))

    x0 = np.array([z[0].real, z[0].imag, z[1].real, z[1].imag])
    # map ordering (x1, y1, x2, y2) -> our (x1, x2, y1, y2)
    perm = [0, 2, 1, 3]
    Hfd = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            pp = x0.copy(); pp[i] += h; pp[j] += h
            pm = x0.copy(); pm[i] += h; pm[j] -= h
            mp = x0.copy(); mp[i] -= h; mp[j] += h
            mm = x0.copy(); mm[i] -= h; mm[j] -= h
            Hfd[i, j] = (as_real(pp) - as_real(pm) - as_real(mp) + as_real(mm)) / (4 * h * h)
    Hfd_perm = Hfd[np.ix_(perm, perm)]
    assert np.max(np.abs(H - Hfd_perm)) < 1e-5


def test_weighted_part_filter():
    p = ZPoly.abs2(2, 0) + ZPoly.abs2(2, 1, 2) + ZPoly.abs2(2, 1)
    w = [Fraction(1, 2), Fraction(1, 4)]
    lead = p.weighted_part(w, Fraction(1))
    assert ((1, 0), (1, 0)) in lead.terms      # |z1|^2 has weight 1
    assert ((0, 2), (0, 2)) in lead.terms      # |z2|^4 has weight 1
    assert ((0, 1), (0, 1)) not in lead.terms  # |z2|^2 has weight 1/2


def test_exact_kernel_basis():
    M = [[QC(1), QC(0, 1), QC(0)], [QC(0), QC(0), QC(0)]]
    ker = exact_kernel(M)
    assert len(ker) == 2
    for vec in ker:
        assert (vec[0] + QC(0, 1) * vec[1]) == QC(0)
