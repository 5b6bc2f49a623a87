"""Domain oracles: membership, rays, supports, affine transport."""

import numpy as np
import pytest

from convexlab.domains import (AffineMap, Ball, Egg, HalfspaceIntersection,
                               PointedDomain, Polydisc, SiegelDomain,
                               apply_affine, boundary_project,
                               contains_affine_line, domain_from_descriptor,
                               ellipsoid, line_distance, line_distance_pairs)
from convexlab.samples import random_affine, random_pointed_domain


def test_contains_examples():
    B = Ball(2)
    assert B.contains([0.5, 0])
    assert not B.contains([1, 0])          # boundary excluded, domain open
    E = Egg([1, 2])
    assert E.contains([0, 0.99])           # 0.99^4 = 0.9606 < 1


def test_line_distance_examples():
    B = Ball(2)
    assert abs(line_distance(B, [0, 0], [1, 0]) - 1.0) < 1e-12
    assert abs(line_distance(B, [0.5, 0], [1, 0]) - 0.5) < 1e-10
    H = HalfspaceIntersection(np.array([[1, 0]]), [1.0])
    assert line_distance(H, [0, 0], [0, 1]) == np.inf


def test_line_distance_rejects_bad_inputs():
    B = Ball(2)
    with pytest.raises(ValueError):
        line_distance(B, [0, 0], [0, 0])
    with pytest.raises(ValueError):
        line_distance(B, [2, 0], [1, 0])


def test_support_examples(rng):
    B = Ball(2)
    for _ in range(5):
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u /= np.linalg.norm(u)
        assert abs(B.support(u) - 1.0) < 1e-12
    # translate shifts support by the real pairing with the direction
    b = np.array([0.2 + 0.1j, -0.3j])
    Bt = Ball(2, center=b)
    u = np.array([1.0, 0.0], dtype=complex)
    assert abs(Bt.support(u) - (1.0 + np.real(np.sum(b * np.conj(u))))) < 1e-12
    # egg: maximize |z2| subject to |z2|^4 < 1
    E = Egg([1, 2])
    assert abs(E.support([0, 1]) - 1.0) < 1e-10


def test_support_sublinearity_sampled(rng):
    E = Egg([1, 3])
    for _ in range(25):
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        hu = E.support(u)
        hv = E.support(v)
        huv = E.support(u + v)
        assert huv <= hu + hv + 1e-9


def test_apply_affine_membership_transport(rng):
    E = Egg([1, 2])
    # unitary image: membership(Uz) equals membership(z)
    M = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    U, _ = np.linalg.qr(M)
    img = apply_affine(AffineMap(U, np.zeros(2)), E)
    Z = 0.7 * (rng.standard_normal((300, 2)) + 1j * rng.standard_normal((300, 2)))
    assert np.array_equal(img.contains_many(Z @ U.T), E.contains_many(Z))
    # scaling by 2 doubles the support in every direction
    B2 = apply_affine(AffineMap(2 * np.eye(2, dtype=complex), np.zeros(2)), Ball(2))
    dirs = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    assert np.allclose(B2.support_many(dirs), 2.0, atol=1e-12)


def test_affine_scaling_of_line_distance(rng):
    # for A = lambda * Id, line_distance scales by |lambda| exactly
    E = Egg([1, 2])
    lam = 1.7 - 0.4j
    A = AffineMap(lam * np.eye(2, dtype=complex), np.zeros(2))
    img = apply_affine(A, E)
    z = np.array([0.2 + 0.1j, 0.3])
    v = np.array([0.5, 1.0 - 0.2j])
    d0 = line_distance(E, z, v)
    d1 = line_distance(img, lam * z, lam * v)
    assert abs(d0 - d1) < 1e-9 * max(1.0, d0)


def test_phase_symmetry_of_circled_domains(rng):
    for dom in (Ball(2), Egg([1, 2])):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        base = line_distance(dom, np.zeros(2), v)
        for th in rng.uniform(0, 2 * np.pi, size=5):
            val = line_distance(dom, np.zeros(2), np.exp(1j * th) * v)
            assert abs(val - base) < 1e-9


def test_boundary_project_examples():
    B = Ball(2)
    y, r, _ = boundary_project(B, np.zeros(2))
    assert abs(np.linalg.norm(y) - 1.0) < 1e-9
    El = ellipsoid([2.0, 1.0])
    y2, r2, _ = boundary_project(El, np.zeros(2))
    assert abs(r2 - 1.0) < 1e-9
    assert abs(y2[0]) < 1e-6 and abs(abs(y2[1]) - 1.0) < 1e-9
    H = HalfspaceIntersection(np.array([[1, 0]]), [1.0])
    e1 = np.array([[1.0, 0.0]], dtype=complex).T
    y3, r3, _ = boundary_project(H, np.zeros(2), subspace=e1)
    assert np.allclose(y3, [1.0, 0.0], atol=1e-9)


def test_contains_affine_line_heuristic():
    assert not contains_affine_line(Ball(2))
    H = HalfspaceIntersection(np.array([[1, 0]]), [1.0])
    assert contains_affine_line(H)
    assert not contains_affine_line(SiegelDomain(2))


def test_convexity_midpoint_probe(rng):
    for _ in range(4):
        p = random_pointed_domain(rng, 2)
        dom = p.domain
        pts = []
        while len(pts) < 60:
            z = 2.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            if dom.contains(z):
                pts.append(z)
        pts = np.array(pts)
        mids = 0.5 * (pts[:30] + pts[30:])
        assert dom.contains_many(mids).all()


def test_ray_consistency(rng):
    dom = Egg([1, 2])
    z = np.array([0.1, 0.2 + 0.1j])
    for _ in range(20):
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u /= np.linalg.norm(u)
        r = dom.ray(z, u)
        ts = np.linspace(0.05, 0.999, 12) * r
        assert dom.contains_many(z[None, :] + ts[:, None] * u[None, :]).all()
        assert not dom.contains(z + r * (1 + 1e-6) * u)


def test_pointed_domain_guards():
    B = Ball(2)
    with pytest.raises(ValueError):
        PointedDomain(B, np.array([1.5, 0], dtype=complex))
    with pytest.raises(ValueError):
        PointedDomain(B, np.array([1.0 - 1e-14, 0], dtype=complex))


def test_polydisc_oracles():
    P = Polydisc([1.0, 2.0])
    assert P.contains([0.5, 1.5])
    assert not P.contains([0.5, 2.0])
    assert abs(P.ray([0, 0], [1, 0]) - 1.0) < 1e-12
    assert abs(P.support([1, 0]) - 1.0) < 1e-12
    assert abs(P.support([0, 1]) - 2.0) < 1e-12


def test_descriptor_round_trip():
    d1 = domain_from_descriptor({"family": "egg", "exponents": [1, 2], "dim": 2})
    assert isinstance(d1, Egg)
    d2 = domain_from_descriptor('{"family": "ball", "dim": 3}')
    assert isinstance(d2, Ball) and d2.dim == 3
    d3 = domain_from_descriptor({
        "family": "halfspaces",
        "normals": [[[1, 0], [0, 0]], [[-1, 0], [0, 0]],
                    [[0, 0], [1, 0]], [[0, 0], [-1, 0]],
                    [[0, 1], [0, 0]], [[0, -1], [0, 0]],
                    [[0, 0], [0, 1]], [[0, 0], [0, -1]]],
        "offsets": [1, 1, 1, 1, 1, 1, 1, 1]})
    assert d3.contains([0.5, 0.5])
    d4 = domain_from_descriptor({
        "family": "poly_model", "m": [4],
        "P": [{"alpha": [2], "beta": [2], "coeff": [1.0, 0.0]}]})
    assert d4.contains([0, 0]) and not d4.contains([1.5, 0])
    d5 = domain_from_descriptor({"family": "siegel", "dim": 2})
    assert d5.contains([1j, 0])


def test_transformed_composition_collapses(rng):
    B = Ball(2)
    A1 = random_affine(rng, 2)
    A2 = random_affine(rng, 2)
    img = apply_affine(A2, apply_affine(A1, B))
    assert img.base is B  # nested wrappers collapse to one map
    z = img.map(np.array([0.3, 0.1 - 0.2j]))
    assert img.contains(z) == B.contains([0.3, 0.1 - 0.2j])


def test_line_distance_pairs_matches_scalar(rng):
    E = Egg([1, 2])
    Z = np.vstack([[0.1, 0.2], [0.0, 0.5]]).astype(complex)
    V = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    batch = line_distance_pairs(E, Z, V)
    for i in range(2):
        assert abs(batch[i] - line_distance(E, Z[i], V[i])) < 1e-9
