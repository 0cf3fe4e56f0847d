"""S-matrix pair, bilinear transmittivities/reflectivities and singularity search."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BilinscatError, SingularMatrix, SpectralSingularity
from .linalg import DEFAULT_TOL, Block2Matrix, frozen, invert, max_norm
from .potential import PhysicalParams, PotentialSpec
from .transfer import (EnergyPoint, ReducedTransferPair, assemble_transfer, energy_point,
                       reduce)

DUALITY_TOL = 1e-9


@dataclass(frozen=True)
class SMatrixPair:
    s_plus: Block2Matrix
    s_minus: Block2Matrix
    energy: EnergyPoint
    duality_residual: float
    route_discrepancy: float = 0.0
    near_singular: bool = False
    reduced: ReducedTransferPair | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Bilinear transmittivities and reflectivities as ``(n, n)`` matrices."""

    t1: np.ndarray
    t2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    route_discrepancy: float = 0.0

    def items(self):
        return (("t1", self.t1), ("t2", self.t2), ("r1", self.r1), ("r2", self.r2))

    def sum_rule_residual(self) -> float:
        eye = np.eye(self.t1.shape[0])
        return max(max_norm(self.t1 + self.r1 - eye), max_norm(self.t2 + self.r2 - eye))


@dataclass(frozen=True)
class ScanRecord:
    energy: EnergyPoint
    coefficients: ScatteringCoefficients | None
    duality_residual: float
    flag: str = "ok"
    error: str | None = None


@dataclass(frozen=True)
class SingularityReport:
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    interval: tuple = (0.0, 0.0)


def _inv(block, label, tol, energy):
    try:
        return invert(block, tol)
    except SingularMatrix as exc:
        raise SpectralSingularity(label, exc.pivot, energy) from exc


def _first_route(tt: Block2Matrix, tt_other: Block2Matrix, labels, tol, energy):
    """``[[ (T~'^T_11)^-1, T~_12 T~_22^-1 ], [ -T~_22^-1 T~_21, T~_22^-1 ]]``."""
    inv22 = _inv(tt.b22, labels[0] + ".22", tol, energy)
    s11 = _inv(tt_other.b11.T, labels[1] + ".11^T", tol, energy)
    return Block2Matrix.from_blocks(s11, tt.b12 @ inv22, -inv22 @ tt.b21, inv22)


def _second_route(tt: Block2Matrix, tt_other: Block2Matrix, labels, tol, energy):
    """Transposed S of the opposite sector, built from ``T~_11^-1``."""
    inv11 = _inv(tt.b11, labels[0] + ".11", tol, energy)
    s22 = _inv(tt_other.b22.T, labels[1] + ".22^T", tol, energy)
    return Block2Matrix.from_blocks(inv11, -inv11 @ tt.b12, tt.b21 @ inv11, s22)


def s_from_reduced(rt: ReducedTransferPair, tol: float = DEFAULT_TOL) -> SMatrixPair:
    """Build ``(S+, S-)`` from the reduced pair and check ``S-^T S+ = 1``.

    The transposed-inverse construction is evaluated as well and its largest
    elementwise disagreement is stored as ``route_discrepancy``.
    """
    E = rt.energy.E
    plus, minus = rt.tt_plus, rt.tt_minus
    s_plus = _first_route(plus, minus, ("tt_plus", "tt_minus"), tol, E)
    s_minus = _first_route(minus, plus, ("tt_minus", "tt_plus"), tol, E)
    # Second construction yields S-^T from T~+ and S+^T from T~-.
    s_minus_t = _second_route(plus, minus, ("tt_plus", "tt_minus"), tol, E)
    s_plus_t = _second_route(minus, plus, ("tt_minus", "tt_plus"), tol, E)
    discrepancy = max(max_norm(s_minus_t.data - s_minus.T.data),
                      max_norm(s_plus_t.data - s_plus.T.data))
    residual = duality_residual(s_plus, s_minus)
    scale = max(max_norm(s_plus.data), max_norm(s_minus.data), 1.0)
    return SMatrixPair(s_plus, s_minus, rt.energy, residual, discrepancy,
                       near_singular=scale > 1.0 / math.sqrt(tol), reduced=rt)


def duality_residual(s_plus: Block2Matrix, s_minus: Block2Matrix) -> float:
    return max_norm(s_minus.data.T @ s_plus.data - np.eye(2 * s_plus.n))


def coefficients(sp: SMatrixPair) -> ScatteringCoefficients:
    """``T1 = S-_11^T S+_11``, ``R1 = S-_21^T S+_21``, ``T2 = S-_22^T S+_22``, ``R2 = S-_12^T S+_12``.

    When the reduced pair is attached, ``T1 = (T~-_11^T T~+_11)^-1`` and
    ``T2 = (T~+_22 T~-_22^T)^-1`` are formed too and their disagreement with
    the S-product route is stored as ``route_discrepancy``.
    """
    s_p, s_m = sp.s_plus, sp.s_minus
    t1 = s_m.b11.T @ s_p.b11
    t2 = s_m.b22.T @ s_p.b22
    r1 = s_m.b21.T @ s_p.b21
    r2 = s_m.b12.T @ s_p.b12
    gap = 0.0
    if sp.reduced is not None:
        tt_p, tt_m = sp.reduced.tt_plus, sp.reduced.tt_minus
        alt_t1 = np.linalg.inv(tt_m.b11.T @ tt_p.b11)
        alt_t2 = np.linalg.inv(tt_p.b22 @ tt_m.b22.T)
        gap = max(max_norm(alt_t1 - t1), max_norm(alt_t2 - t2))
    return ScatteringCoefficients(*(frozen(m) for m in (t1, t2, r1, r2)), gap)


def scatter(p: PotentialSpec, E, params: PhysicalParams = PhysicalParams(),
            tol: float = DEFAULT_TOL):
    """Full pipeline at one energy: ``(SMatrixPair, ScatteringCoefficients)``."""
    e = E if isinstance(E, EnergyPoint) else energy_point(E, params)
    sp = s_from_reduced(reduce(assemble_transfer(p, e, params)), tol)
    return sp, coefficients(sp)


def _scan_one(p, params, E, tol):
    e = energy_point(E, params)
    try:
        sp, co = scatter(p, e, params, tol)
    except SpectralSingularity as exc:
        return ScanRecord(e, None, math.nan, "singular", str(exc))
    except (BilinscatError, ArithmeticError, ValueError) as exc:
        return ScanRecord(e, None, math.nan, "error", str(exc))
    flag = "near-singular" if sp.near_singular else "ok"
    return ScanRecord(e, co, sp.duality_residual, flag)


def scan(p: PotentialSpec, params: PhysicalParams, energies,
         tol: float = DEFAULT_TOL, workers: int = 1) -> list:
    """One :class:`ScanRecord` per energy, in input order.

    Failures (spectral singularities included) become flagged records.
    """
    energies = [float(E) for E in energies]
    if any(E <= 0 for E in energies):
        raise ValueError("scan energies must be positive")
    if any(b <= a for a, b in zip(energies, energies[1:])):
        raise ValueError("scan energies must be strictly increasing")
    if workers <= 1:
        return [_scan_one(p, params, E, tol) for E in energies]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda E: _scan_one(p, params, E, tol), energies))


def singularity_indicator(p: PotentialSpec, params: PhysicalParams, E: float,
                          blocks=("22",)) -> float:
    """Smallest ``|det|`` among the requested diagonal blocks of ``T~+``."""
    rt = reduce(assemble_transfer(p, energy_point(E, params), params))
    vals = [abs(np.linalg.det(rt.tt_plus.block(int(b[0]), int(b[1])))) for b in blocks]
    return min(vals)


def _golden_min(f, a, b, rel_width):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_width * max(abs(a), abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def find_singularities(p: PotentialSpec, params: PhysicalParams, interval,
                       samples: int = 64, threshold: float = 1e-7,
                       rel_width: float = 1e-10, blocks=("22",)) -> SingularityReport:
    """Real energies in ``interval`` where ``det T~+_22`` vanishes.

    ``|det|`` is sampled on a uniform grid; every local minimum is bracketed
    by its grid neighbours and shrunk by golden-section search to relative
    width ``rel_width``.  Minima whose refined ``|det|`` is below
    ``threshold`` are reported.
    """
    lo, hi = (float(x) for x in interval)
    if not 0 < lo < hi:
        raise ValueError("interval must satisfy 0 < E_lo < E_hi")
    if samples < 8:
        raise ValueError("need at least 8 samples")
    grid = np.linspace(lo, hi, samples)

    def f(E):
        return singularity_indicator(p, params, E, blocks)

    vals = np.array([f(E) for E in grid])
    energies, residuals = [], []
    for i in range(samples):
        left = vals[i - 1] if i > 0 else np.inf
        right = vals[i + 1] if i + 1 < samples else np.inf
        if not (vals[i] <= left and vals[i] < right):
            continue
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, samples - 1)]
        E, r = _golden_min(f, a, b, rel_width)
        if r <= threshold and lo <= E <= hi:
            if energies and abs(E - energies[-1]) <= 10 * rel_width * E:
                continue
            energies.append(float(E))
            residuals.append(float(r))
    return SingularityReport(energies, residuals, (lo, hi))
