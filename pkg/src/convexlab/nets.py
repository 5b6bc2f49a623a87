"""Quasi-uniform direction nets on unit spheres of C^d (= R^{2d}).

The nets drive support-function comparisons, boundary sampling, and all
sphere sweeps.  Construction: a golden-ratio Kronecker lattice pushed
through the inverse normal CDF and normalized, then closed under the
antipodal map.  The angular mesh is estimated by a seeded probe and
carried along for error reporting; it is an estimate of the covering
radius, not a certified bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = ["DirectionNet"]


@dataclass
class DirectionNet:
    directions: np.ndarray   # (n, d) complex unit vectors
    mesh: float              # estimated angular covering radius (radians)

    def __post_init__(self):
        if len(self.directions) == 0:
            raise ValueError("empty net")
        if self.mesh <= 0:
            raise ValueError("mesh must be positive")

    @property
    def size(self) -> int:
        return len(self.directions)

    @staticmethod
    def real_sphere_points(n: int, rdim: int, seed: int = 0) -> np.ndarray:
        """n quasi-uniform points on S^{rdim-1}, antipodally closed."""
        m = max(1, n // 2)
        # Kronecker lattice with square-root irrationals, one per axis
        primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
        alphas = np.array([np.sqrt(p) % 1 for p in primes[:rdim]])
        idx = np.arange(1, m + 1)[:, None]
        u = (idx * alphas[None, :] + 0.5 / m) % 1.0
        g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        norms = np.linalg.norm(g, axis=1)
        pts = g / norms[:, None]
        pts = np.concatenate([pts, -pts], axis=0)
        return pts

    @staticmethod
    def standard(d: int, n: int = 4096, seed: int = 0) -> "DirectionNet":
        """Net of n complex unit vectors in C^d."""
        pts = DirectionNet.real_sphere_points(n, 2 * d, seed)
        dirs = pts[:, :d] + 1j * pts[:, d:]
        mesh = DirectionNet._estimate_mesh(pts, seed)
        return DirectionNet(dirs, mesh)

    @staticmethod
    def _estimate_mesh(pts: np.ndarray, seed: int, n_probe: int = 512) -> float:
        rng = np.random.default_rng(seed + 12345)
        probes = rng.standard_normal((n_probe, pts.shape[1]))
        probes /= np.linalg.norm(probes, axis=1)[:, None]
        cos = np.clip(probes @ pts.T, -1.0, 1.0)
        worst = float(np.arccos(np.max(cos, axis=1)).max())
        return 1.5 * worst + 1e-9

    def as_real(self) -> np.ndarray:
        return np.concatenate([self.directions.real, self.directions.imag], axis=1)
