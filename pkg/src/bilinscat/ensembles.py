"""Seeded random instances used by the invariant suites and the tests."""
from __future__ import annotations

import numpy as np

from .potential import AnalyticSegment, ConstantSegment, DeltaSpike, PotentialSpec


def random_complex(rng: np.random.Generator, shape=(), scale=1.0):
    return scale * (rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape))


def _coef(c: complex) -> str:
    return f"({c.real:.6f}+{c.imag:.6f}*i)"


def random_expression(rng: np.random.Generator, center: float, scale: float) -> str:
    """Smooth analytic entry: complex Gaussian bump plus a small linear term."""
    a, b = random_complex(rng, 2, scale)
    width = rng.uniform(0.4, 1.0)
    return (f"{_coef(a)}*exp(-((z-{center:.6f})/{width:.6f})^2)"
            f"+{_coef(b * 0.2)}*z")


def random_potential(rng: np.random.Generator, n: int, kinds=("delta", "constant", "analytic"),
                     scale: float = 0.8) -> PotentialSpec:
    """Potential on window ``(0, L)`` mixing the requested element kinds.

    Every kind in ``kinds`` appears at least once; strengths are complex and
    generically non-symmetric for ``n > 1``.
    """
    elements = []
    z = 0.3
    for kind in kinds:
        if kind == "delta":
            elements.append(DeltaSpike(z + rng.uniform(0, 0.4), random_complex(rng, (n, n), scale)))
            z += 0.6
        elif kind == "constant":
            w = rng.uniform(0.4, 1.2)
            elements.append(ConstantSegment(z, z + w, random_complex(rng, (n, n), scale)))
            z += w + 0.2
        elif kind == "analytic":
            w = rng.uniform(0.8, 1.6)
            mid = z + w / 2
            expr = [[random_expression(rng, mid, scale) for _ in range(n)] for _ in range(n)]
            elements.append(AnalyticSegment(z, z + w, expr))
            z += w + 0.2
        else:
            raise ValueError(f"unknown element kind {kind!r}")
    order = rng.permutation(len(elements))
    # Shuffle list order only; geometry is fixed by positions.
    elements = [elements[i] for i in order]
    return PotentialSpec(n, elements, (0.0, z + 0.3))


def random_matrix(rng: np.random.Generator, n: int, max_cond: float = 1e6) -> np.ndarray:
    while True:
        a = random_complex(rng, (n, n))
        if np.linalg.cond(a) < max_cond:
            return a
