"""convexlab: numerical laboratory for the complex geometry of convex domains.

Subpackages by theme:

- :mod:`convexlab.domains`    convex-domain oracles, families, affine maps
- :mod:`convexlab.nets`       direction nets on spheres
- :mod:`convexlab.hausdorff`  (local) Hausdorff distances and convergence reports
- :mod:`convexlab.kobayashi`  certified two-sided invariant-metric bounds
- :mod:`convexlab.linetype`   boundary vanishing orders and line type
- :mod:`convexlab.rescale`    normalization into the compact family and blow-ups
- :mod:`convexlab.bergman`    truncated monomial kernels, metric, curvature
- :mod:`convexlab.squeeze`    squeezing-function bounds
- :mod:`convexlab.cli`        the ``lab`` experiment runner
"""

__version__ = "0.1.0"
