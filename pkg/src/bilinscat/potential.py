"""Composite one-dimensional, possibly matrix-valued, complex potentials."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvalidPotential, NonAnalyticAtComplexPoint
from .expression import parse_expression
from .linalg import channel_matrix, frozen


@dataclass(frozen=True)
class PhysicalParams:
    """Units.  The defaults ``hbar = 1, mass = 1/2`` make ``hbar^2/2M = 1``."""

    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be strictly positive")

    @property
    def kinetic(self) -> float:
        """The factor ``2M / hbar^2`` converting energies to squared wavenumbers."""
        return 2.0 * self.mass / self.hbar**2


@dataclass(frozen=True, eq=False)
class DeltaSpike:
    position: float
    strength: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.position):
            raise InvalidPotential("delta position must be finite")
        object.__setattr__(self, "position", float(self.position))
        object.__setattr__(self, "strength", channel_matrix(self.strength))

    @property
    def n(self):
        return self.strength.shape[0]

    @property
    def footprint(self):
        return (self.position, self.position)

    def transposed(self):
        return DeltaSpike(self.position, self.strength.T)

    def __eq__(self, other):
        return (type(other) is DeltaSpike and self.position == other.position
                and np.array_equal(self.strength, other.strength))


@dataclass(frozen=True, eq=False)
class ConstantSegment:
    z_start: float
    z_end: float
    value: np.ndarray

    def __post_init__(self):
        _check_interval(self.z_start, self.z_end)
        object.__setattr__(self, "z_start", float(self.z_start))
        object.__setattr__(self, "z_end", float(self.z_end))
        object.__setattr__(self, "value", channel_matrix(self.value))

    @property
    def n(self):
        return self.value.shape[0]

    @property
    def width(self):
        return self.z_end - self.z_start

    @property
    def footprint(self):
        return (self.z_start, self.z_end)

    def transposed(self):
        return ConstantSegment(self.z_start, self.z_end, self.value.T)

    def __eq__(self, other):
        return (type(other) is ConstantSegment and self.footprint == other.footprint
                and np.array_equal(self.value, other.value))


@dataclass(frozen=True, eq=False)
class AnalyticSegment:
    """Segment whose ``n x n`` entries are expression strings in ``z``.

    ``expression`` may be a single string (``n = 1``) or a nested list of
    strings.  The parsed trees are kept in ``trees``.
    """

    z_start: float
    z_end: float
    expression: tuple
    trees: tuple = field(init=False, repr=False)

    def __post_init__(self):
        _check_interval(self.z_start, self.z_end)
        object.__setattr__(self, "z_start", float(self.z_start))
        object.__setattr__(self, "z_end", float(self.z_end))
        src = self.expression
        if isinstance(src, str):
            src = [[src]]
        rows = tuple(tuple(str(s) for s in row) for row in src)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise DimensionMismatch("expression matrix must be square")
        object.__setattr__(self, "expression", rows)
        object.__setattr__(self, "trees",
                           tuple(tuple(parse_expression(s) for s in row) for row in rows))

    @property
    def n(self):
        return len(self.expression)

    @property
    def width(self):
        return self.z_end - self.z_start

    @property
    def footprint(self):
        return (self.z_start, self.z_end)

    def values(self, z) -> np.ndarray:
        """Evaluate at an array of points; result has shape ``z.shape + (n, n)``."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (self.n, self.n), dtype=complex)
        for i, row in enumerate(self.trees):
            for j, tree in enumerate(row):
                out[..., i, j] = tree(z)
        if not np.all(np.isfinite(out)):
            raise InvalidPotential("analytic segment evaluates to a non-finite value")
        return out

    def transposed(self):
        return AnalyticSegment(self.z_start, self.z_end,
                               tuple(zip(*self.expression)))

    def __eq__(self, other):
        return (type(other) is AnalyticSegment and self.footprint == other.footprint
                and self.expression == other.expression)


Element = Union[DeltaSpike, ConstantSegment, AnalyticSegment]


def _check_interval(a, b):
    if not (np.isfinite(a) and np.isfinite(b)):
        raise InvalidPotential("segment endpoints must be finite")
    if not a < b:
        raise InvalidPotential(f"segment endpoints must satisfy z_start < z_end, got ({a}, {b})")


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Ordered list of elements inside the scattering window ``(z_lo, z_hi)``.

    The potential vanishes outside all elements.  Segments must lie strictly
    inside the window so that the potential vanishes at both window ends;
    delta spikes may sit on a window end (``z_lo == z_hi == a`` encodes the
    window ``(a-0, a+0)``).  Segment interiors may not overlap.
    """

    n: int
    elements: tuple
    window: tuple

    def __post_init__(self):
        if self.n < 1:
            raise InvalidPotential("channel count must be >= 1")
        object.__setattr__(self, "elements", tuple(self.elements))
        lo, hi = (float(w) for w in self.window)
        object.__setattr__(self, "window", (lo, hi))
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            raise InvalidPotential(f"invalid window ({lo}, {hi})")
        for el in self.elements:
            if not isinstance(el, (DeltaSpike, ConstantSegment, AnalyticSegment)):
                raise InvalidPotential(f"unsupported element {el!r}")
            if el.n != self.n:
                raise DimensionMismatch(f"element has {el.n} channels, potential has {self.n}")
            a, b = el.footprint
            if isinstance(el, DeltaSpike):
                if not lo <= a <= hi:
                    raise InvalidPotential(f"delta at {a} lies outside window ({lo}, {hi})")
            elif not (lo < a and b < hi):
                raise InvalidPotential(
                    f"segment ({a}, {b}) must lie strictly inside window ({lo}, {hi}) "
                    "so that the potential vanishes at both window ends")
        segs = sorted(el.footprint for el in self.elements if not isinstance(el, DeltaSpike))
        for (a0, b0), (a1, b1) in zip(segs, segs[1:]):
            if a1 < b0:
                raise InvalidPotential(f"segments ({a0}, {b0}) and ({a1}, {b1}) overlap")

    @classmethod
    def empty(cls, window=(0.0, 1.0), n: int = 1) -> "PotentialSpec":
        return cls(n, (), window)

    @property
    def segments(self):
        return [el for el in self.elements if not isinstance(el, DeltaSpike)]

    @property
    def deltas(self):
        return [el for el in self.elements if isinstance(el, DeltaSpike)]

    def ordered_elements(self):
        """Elements sorted by position; coincident deltas keep list order."""
        keyed = [(el.footprint[0], i, el) for i, el in enumerate(self.elements)]
        return [el for _, _, el in sorted(keyed, key=lambda t: (t[0], t[1]))]

    def is_symmetric(self) -> bool:
        """True when every value and strength equals its own transpose."""
        return transpose_potential(self) == self

    def __eq__(self, other):
        return (isinstance(other, PotentialSpec) and self.n == other.n
                and self.window == other.window
                and len(self.elements) == len(other.elements)
                and all(a == b for a, b in zip(self.elements, other.elements)))


def element_at(p: PotentialSpec, x: float):
    """The segment whose closed footprint contains ``x`` (first listed wins), else None."""
    for el in p.elements:
        if isinstance(el, DeltaSpike):
            continue
        if el.z_start <= x <= el.z_end:
            return el
    return None


def evaluate(p: PotentialSpec, z) -> np.ndarray:
    """Pointwise ``V(z)`` as an ``(n, n)`` matrix.

    Delta spikes never contribute here.  A point off the real axis is only
    admitted where the potential is analytic, i.e. inside an analytic
    segment's footprint or away from every element.
    """
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError("evaluation point must be finite")
    x = z.real
    if z.imag != 0.0:
        for el in p.elements:
            a, b = el.footprint
            if a <= x <= b and not isinstance(el, AnalyticSegment):
                raise NonAnalyticAtComplexPoint(
                    f"{type(el).__name__} at {el.footprint} is not analytic at z={z}")
    el = element_at(p, x)
    if el is None:
        return frozen(np.zeros((p.n, p.n)))
    if isinstance(el, ConstantSegment):
        return el.value
    return frozen(el.values(z))


def transpose_potential(p: PotentialSpec) -> PotentialSpec:
    """The potential with every matrix replaced by its transpose (geometry unchanged)."""
    return PotentialSpec(p.n, tuple(el.transposed() for el in p.elements), p.window)


def as_elements(items: Sequence, n: int) -> list:
    """Build elements from plain dicts in the config-file layout."""
    out = []
    for item in items:
        kind = item["type"]
        if kind == "delta":
            out.append(DeltaSpike(item["position"], _matrix(item["strength"], n)))
        elif kind == "constant":
            out.append(ConstantSegment(item["from"], item["to"], _matrix(item["value"], n)))
        elif kind == "analytic":
            out.append(AnalyticSegment(item["from"], item["to"], item["expr"]))
        else:
            raise InvalidPotential(f"unknown element type {kind!r}")
    return out


def _matrix(value, n):
    """Decode a row-major nested list whose entries are numbers or ``[re, im]`` pairs."""
    if isinstance(value, list):
        value = [[complex(*x) if isinstance(x, list) else complex(x) for x in row]
                 for row in value]
    return channel_matrix(value, n)
