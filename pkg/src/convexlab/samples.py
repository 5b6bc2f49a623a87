"""Seeded random domain generators shared by experiments and tests."""

from __future__ import annotations

import numpy as np

from .domains import (AffineMap, Ball, ConvexDomain, Egg, HalfspaceIntersection,
                      PointedDomain, apply_affine)
from .nets import DirectionNet

__all__ = ["random_affine", "random_polytope", "random_transformed_ball",
           "random_transformed_egg", "random_bounded_domain",
           "random_pointed_domain", "random_interior_point"]


def random_affine(rng: np.random.Generator, dim: int, spread: float = 1.5,
                  translation: float = 0.3) -> AffineMap:
    """Well-conditioned random complex-affine map."""
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, _ = np.linalg.qr(A)
    B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q2, _ = np.linalg.qr(B)
    scales = np.exp(rng.uniform(-np.log(spread), np.log(spread), size=dim))
    L = Q @ np.diag(scales).astype(np.complex128) @ Q2
    b = translation * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    return AffineMap(L, b)


def random_polytope(rng: np.random.Generator, dim: int,
                    n_faces: int = 10) -> HalfspaceIntersection:
    """Bounded random halfspace intersection containing the origin.

    Coordinate faces force boundedness; extra faces are tangent planes of
    a random ellipsoid at random boundary directions.
    """
    eye = np.eye(dim, dtype=np.complex128)
    normals = [eye[j] for j in range(dim)] + [-eye[j] for j in range(dim)]
    normals += [1j * eye[j] for j in range(dim)] + [-1j * eye[j] for j in range(dim)]
    offsets = list(rng.uniform(0.6, 1.8, size=len(normals)))
    for _ in range(n_faces):
        u = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        normals.append(u)
        offsets.append(float(rng.uniform(0.5, 1.6)))
    return HalfspaceIntersection(np.array(normals), offsets)


def random_transformed_ball(rng: np.random.Generator, dim: int) -> ConvexDomain:
    return apply_affine(random_affine(rng, dim), Ball(dim))


def random_transformed_egg(rng: np.random.Generator, dim: int) -> ConvexDomain:
    ks = [int(rng.integers(1, 4)) for _ in range(dim)]
    A = random_affine(rng, dim, spread=1.4, translation=0.2)
    return apply_affine(A, Egg(ks))


def random_bounded_domain(rng: np.random.Generator, dim: int) -> ConvexDomain:
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return random_polytope(rng, dim)
    if kind == 1:
        return random_transformed_ball(rng, dim)
    return random_transformed_egg(rng, dim)


def random_interior_point(rng: np.random.Generator, domain: ConvexDomain,
                          pull: float = 0.6) -> np.ndarray:
    """Random interior point: a random ray from the interior anchor,
    stopped strictly before the boundary."""
    z0 = domain.interior_point()
    u = rng.standard_normal(domain.dim) + 1j * rng.standard_normal(domain.dim)
    u /= np.linalg.norm(u)
    r = domain.ray_many(z0, u[None, :])[0]
    if not np.isfinite(r):
        r = 1.0
    return z0 + pull * float(rng.uniform(0.1, 0.9)) * r * u


def random_pointed_domain(rng: np.random.Generator, dim: int) -> PointedDomain:
    domain = random_bounded_domain(rng, dim)
    return PointedDomain(domain, random_interior_point(rng, domain))
