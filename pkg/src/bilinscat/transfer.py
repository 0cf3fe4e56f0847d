"""Retarded/advanced transfer matrices and their reduced (amplitude) form.

A transfer matrix maps ``(phi, phi')`` at the left end of a region to the
right end.  The retarded matrix ``T+`` is built from ``V``, the advanced
matrix ``T-`` from ``V^T``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteState
from .linalg import Block2Matrix, identity, max_norm
from .potential import (AnalyticSegment, ConstantSegment, DeltaSpike, PhysicalParams,
                        PotentialSpec, element_at, transpose_potential)

RETARDED = +1
ADVANCED = -1

# RK4 steps per unit of (width * local wavenumber) for analytic segments.
STEPS_PER_RADIAN = 400
MIN_STEPS = 16


def _sign(sign) -> int:
    if sign in (RETARDED, "retarded", "+"):
        return RETARDED
    if sign in (ADVANCED, "advanced", "-"):
        return ADVANCED
    raise ValueError(f"sign must be retarded (+1) or advanced (-1), got {sign!r}")


@dataclass(frozen=True)
class EnergyPoint:
    """An energy with its principal wavenumber ``k0 = sqrt(2 M E / hbar^2)``."""

    E: complex
    k0: complex

    @property
    def is_complex(self) -> bool:
        return complex(self.E).imag != 0.0


def energy_point(E, params: PhysicalParams = PhysicalParams()) -> EnergyPoint:
    E = complex(E)
    if E == 0:
        raise ValueError("E = 0 has no plane-wave wavenumber")
    if not (math.isfinite(E.real) and math.isfinite(E.imag)):
        raise ValueError("energy must be finite")
    k0 = cmath.sqrt(params.kinetic * E)
    if E.imag != 0.0:
        warnings.warn(f"complex energy E={E}: plane-wave asymptotics are not bounded",
                      RuntimeWarning, stacklevel=2)
    return EnergyPoint(E, k0)


@dataclass(frozen=True)
class TransferPair:
    t_plus: Block2Matrix
    t_minus: Block2Matrix
    energy: EnergyPoint
    window: tuple


@dataclass(frozen=True)
class ReducedTransferPair:
    tt_plus: Block2Matrix
    tt_minus: Block2Matrix
    energy: EnergyPoint


def delta_transfer(spike: DeltaSpike, params: PhysicalParams = PhysicalParams(),
                   sign=RETARDED) -> Block2Matrix:
    """Jump ``phi' -> phi' + (2M/hbar^2) g phi`` across a delta spike."""
    g = spike.strength if _sign(sign) == RETARDED else spike.strength.T
    n = spike.n
    zero = np.zeros((n, n))
    return Block2Matrix.from_blocks(identity(n), zero, params.kinetic * g, identity(n))


def cos_sinc_block(k2: np.ndarray, width) -> Block2Matrix:
    """Fundamental matrix ``[[C, S], [-K^2 S, C]]`` of ``phi'' = -K^2 phi``.

    ``C = cos(K w)`` and ``S = sin(K w)/K`` are summed as power series in
    ``K^2 w^2`` with scaling and squaring, so no square root of ``K^2`` is
    taken.  ``width`` may be complex.
    """
    k2 = np.asarray(k2, dtype=complex)
    n = k2.shape[0]
    eye = np.eye(n, dtype=complex)
    x = k2 * width**2
    norm = float(np.max(np.sum(np.abs(x), axis=1)))
    halvings = 0
    while norm > 0.25:
        norm /= 4.0
        halvings += 1
    xs = x / 4.0**halvings
    c = eye.copy()
    s = eye.copy()
    term = eye.copy()
    for m in range(1, 40):
        term = -term @ xs / ((2 * m - 1) * (2 * m))
        c = c + term
        s = s + term / (2 * m + 1)
        if max_norm(term) < 1e-18:
            break
    s = s * (width / 2.0**halvings)
    for _ in range(halvings):
        s, c = 2.0 * s @ c, 2.0 * c @ c - eye
    return Block2Matrix.from_blocks(c, s, -k2 @ s, c)


def constant_segment_transfer(seg: ConstantSegment, e: EnergyPoint,
                              params: PhysicalParams = PhysicalParams(),
                              sign=RETARDED) -> Block2Matrix:
    v0 = seg.value if _sign(sign) == RETARDED else seg.value.T
    k2 = params.kinetic * (e.E * np.eye(seg.n) - v0)
    return cos_sinc_block(k2, seg.width)


def free_transfer(n: int, width, e: EnergyPoint) -> Block2Matrix:
    return cos_sinc_block(e.k0**2 * np.eye(n), width)


def rk4_step_matrices(v_start, v_mid, v_end, h, E, kinetic) -> np.ndarray:
    """One-step RK4 propagators for ``Y' = [[0, 1], [kin (V - E), 0]] Y``.

    ``v_*`` have shape ``(steps, n, n)`` and hold ``V`` at the start, midpoint
    and end of each step; ``h`` may be complex.  Returns ``(steps, 2n, 2n)``.
    """
    steps, n, _ = v_start.shape
    eye_n = np.eye(n)

    def generator(v):
        a = np.zeros((steps, 2 * n, 2 * n), dtype=complex)
        a[:, :n, n:] = eye_n
        a[:, n:, :n] = kinetic * (v - E * eye_n)
        return a

    a1, a2, a3 = generator(v_start), generator(v_mid), generator(v_end)
    eye = np.broadcast_to(np.eye(2 * n), a1.shape)
    k1 = a1
    k2 = a2 @ (eye + 0.5 * h * k1)
    k3 = a2 @ (eye + 0.5 * h * k2)
    k4 = a3 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def chain(step_matrices, start=None) -> np.ndarray:
    """Ordered product ``M_{m-1} ... M_1 M_0`` (times ``start``)."""
    out = np.eye(step_matrices.shape[-1], dtype=complex) if start is None else start
    for m in step_matrices:
        out = m @ out
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("fundamental matrix overflowed during integration")
    return out


def default_steps(seg: AnalyticSegment, e: EnergyPoint,
                  params: PhysicalParams = PhysicalParams(),
                  z_start=None, z_end=None) -> int:
    """Step count resolving the local wavenumber with ``STEPS_PER_RADIAN``."""
    a = seg.z_start if z_start is None else z_start
    b = seg.z_end if z_end is None else z_end
    probe = seg.values(np.linspace(a, b, 33))
    scale = max(max_norm(params.kinetic * (probe - e.E * np.eye(seg.n))), 1.0)
    return max(MIN_STEPS, int(math.ceil(abs(b - a) * math.sqrt(scale) * STEPS_PER_RADIAN)))


def ode_transfer(seg: AnalyticSegment, e: EnergyPoint,
                 params: PhysicalParams = PhysicalParams(), sign=RETARDED,
                 steps: int | None = None, z_start=None, z_end=None) -> Block2Matrix:
    """Fundamental matrix across an analytic segment by classical RK4.

    ``z_start``/``z_end`` default to the segment ends; they may be complex
    (straight path in the complex plane) when the caller knows the potential
    is analytic there.
    """
    a = seg.z_start if z_start is None else z_start
    b = seg.z_end if z_end is None else z_end
    if steps is None:
        steps = default_steps(seg, e, params, a, b)
    if steps < MIN_STEPS:
        raise ValueError(f"ode_transfer needs at least {MIN_STEPS} steps")
    return Block2Matrix(chain(_segment_steps(seg, a, b, steps, e, params, _sign(sign))))


def _segment_steps(seg, a, b, steps, e, params, sign) -> np.ndarray:
    nodes = a + (b - a) * np.linspace(0.0, 1.0, 2 * steps + 1)
    v = seg.values(nodes)
    if sign == ADVANCED:
        v = np.swapaxes(v, -1, -2)
    h = (b - a) / steps
    return rk4_step_matrices(v[0:-1:2], v[1::2], v[2::2], h, e.E, params.kinetic)


def breakpoints(p: PotentialSpec, a: float, b: float) -> list:
    """Sorted distinct positions in ``[a, b]`` where the potential may change."""
    pts = {a, b}
    for el in p.elements:
        for x in el.footprint:
            if a <= x <= b:
                pts.add(x)
    return sorted(pts)


def piece_transfer(p: PotentialSpec, x0: float, x1: float, e: EnergyPoint,
                   params: PhysicalParams, sign, steps: int | None = None) -> Block2Matrix:
    """Transfer across ``[x0, x1]``, an interval on which no element boundary lies."""
    if x1 == x0:
        return Block2Matrix.identity(p.n)
    el = element_at(p, 0.5 * (x0 + x1))
    if el is None:
        return free_transfer(p.n, x1 - x0, e)
    if isinstance(el, ConstantSegment):
        v0 = el.value if sign == RETARDED else el.value.T
        return cos_sinc_block(params.kinetic * (e.E * np.eye(p.n) - v0), x1 - x0)
    if steps is None:
        steps = default_steps(el, e, params, x0, x1)
    return Block2Matrix(chain(_segment_steps(el, x0, x1, steps, e, params, sign)))


def deltas_at(p: PotentialSpec, x: float) -> list:
    return [el for el in p.elements if isinstance(el, DeltaSpike) and el.position == x]


def propagate(p: PotentialSpec, a: float, b: float, e: EnergyPoint,
              params: PhysicalParams = PhysicalParams(), sign=RETARDED,
              include_ends: bool = True) -> Block2Matrix:
    """Compose the transfer matrix of ``p`` from ``a`` to ``b`` (``a <= b``).

    Deltas sitting exactly at ``a`` or ``b`` are included iff ``include_ends``.
    ``sign`` selects ``V`` (retarded) or ``V^T`` (advanced).
    """
    sign = _sign(sign)
    pts = breakpoints(p, a, b)
    total = Block2Matrix.identity(p.n)
    for i, x in enumerate(pts):
        if include_ends or a < x < b:
            for spike in deltas_at(p, x):
                total = delta_transfer(spike, params, sign) @ total
        if i + 1 < len(pts):
            total = piece_transfer(p, x, pts[i + 1], e, params, sign) @ total
    return total


def assemble_transfer(p: PotentialSpec, e: EnergyPoint,
                      params: PhysicalParams = PhysicalParams()) -> TransferPair:
    """Transfer pair across the whole window, free gaps included."""
    lo, hi = p.window
    t_plus = propagate(p, lo, hi, e, params, RETARDED)
    # Built from the transposed potential, which is what the advanced sector sees.
    t_minus = propagate(transpose_potential(p), lo, hi, e, params, RETARDED)
    return TransferPair(t_plus, t_minus, e, p.window)


def amplitude_maps(k0: complex, sign) -> tuple:
    """Left and right factors ``(A, B)`` such that reduced ``= 1 + (A (T - 1) B) / 2``."""
    s = _sign(sign)
    left = np.array([[1.0, s / (1j * k0)], [1.0, -s / (1j * k0)]])
    right = np.array([[1.0, 1.0], [s * 1j * k0, -s * 1j * k0]])
    return left, right


def reduce_block(t: Block2Matrix, k0: complex, sign) -> Block2Matrix:
    left, right = amplitude_maps(k0, sign)
    n = t.n
    eye = np.eye(n)
    big_left = np.kron(left, eye)
    big_right = np.kron(right, eye)
    root = cmath.sqrt(k0)
    dev = t.data - np.eye(2 * n)
    return Block2Matrix(np.eye(2 * n) + (root / 2.0) * big_left @ dev @ big_right / root)


def reduce(tp: TransferPair) -> ReducedTransferPair:
    """Convert ``(T+, T-)`` to the amplitude-basis pair ``(T~+, T~-)``."""
    k0 = tp.energy.k0
    if k0 == 0:
        raise ValueError("reduced transfer matrix undefined for k0 = 0")
    return ReducedTransferPair(reduce_block(tp.t_plus, k0, RETARDED),
                               reduce_block(tp.t_minus, k0, ADVANCED), tp.energy)
