"""Seeded invariant suites behind ``bilinscat verify``."""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from . import dynamics, linalg, scattering, transfer
from .ensembles import random_matrix, random_potential
from .potential import (ConstantSegment, DeltaSpike, PhysicalParams, PotentialSpec, evaluate,
                        transpose_potential)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value)) and self.value <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<32s} max={self.value:.3e} limit={self.limit:.1e} {status}"


def _linalg(rng):
    inv_err = assoc = trans = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 5))
        a = random_matrix(rng, n)
        inv_err = max(inv_err, linalg.max_norm(linalg.invert(linalg.invert(a)) - a)
                      / linalg.max_norm(a))
        x, y, z = (linalg.Block2Matrix(random_matrix(rng, 2 * n)) for _ in range(3))
        left, right = (x @ y) @ z, x @ (y @ z)
        assoc = max(assoc, linalg.max_norm(left.data - right.data) / linalg.max_norm(left.data))
        trans = max(trans, linalg.max_norm((x @ y).T.data - (y.T @ x.T).data))
    return [SuiteResult("linalg.invert_roundtrip", inv_err, 1e-10),
            SuiteResult("linalg.block_mul_associative", assoc, 1e-12),
            SuiteResult("linalg.transpose_reverses", trans, 1e-14)]


def _potential(rng):
    worst = 0.0
    for n in (1, 2, 3):
        p = random_potential(rng, n)
        q = transpose_potential(p)
        worst = max(worst, 0.0 if transpose_potential(q) == p else 1.0)
        for z in rng.uniform(*p.window, 5):
            worst = max(worst, linalg.max_norm(evaluate(q, z) - evaluate(p, z).T))
    return [SuiteResult("potential.transpose", worst, 1e-15)]


def _transfer(rng, params):
    det_err = sym_err = 0.0
    for _ in range(6):
        p = random_potential(rng, 1)
        e = transfer.energy_point(rng.uniform(0.5, 5.0), params)
        tp = transfer.assemble_transfer(p, e, params)
        det_err = max(det_err, abs(np.linalg.det(tp.t_plus.data) - 1.0))
    for _ in range(4):
        n = int(rng.integers(1, 4))
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        v = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        p = PotentialSpec(n, [DeltaSpike(0.5, g + g.T), ConstantSegment(1.0, 2.0, v + v.T)],
                          (0.0, 2.5))
        rt = transfer.reduce(transfer.assemble_transfer(
            p, transfer.energy_point(rng.uniform(0.5, 5.0), params), params))
        swap = np.kron(np.array([[0, 1], [1, 0]]), np.eye(n))
        sym_err = max(sym_err, linalg.max_norm(rt.tt_minus.data - swap @ rt.tt_plus.data @ swap))
    g = 0.7 - 0.4j
    e = transfer.energy_point(2.0, params)
    target = transfer.delta_transfer(DeltaSpike(0.0, g), params).data
    errs = []
    for w in (1e-3, 5e-4):
        seg = ConstantSegment(0.0, w, g / w)
        errs.append(linalg.max_norm(transfer.constant_segment_transfer(seg, e, params).data
                                    - target))
    order = np.log2(errs[0] / errs[1])
    return [SuiteResult("transfer.det_unity", det_err, 1e-10),
            SuiteResult("transfer.symmetric_swap", sym_err, 1e-12),
            SuiteResult("transfer.delta_limit_order", abs(order - 1.0), 0.1)]


def textbook_square_well(E, v0, width, params):
    """Conventional ``|t|^2`` for a real rectangular well or barrier."""
    kappa = cmath.sqrt(params.kinetic * (E - v0))
    return 1.0 / (1.0 + (v0**2 * cmath.sin(kappa * width) ** 2 / (4.0 * E * (E - v0))).real)


def _scattering(rng, params):
    dual = flux = routes = 0.0
    for i in range(12):
        p = random_potential(rng, 1 + i % 3)
        sp, co = scattering.scatter(p, rng.uniform(0.5, 5.0), params)
        dual = max(dual, sp.duality_residual)
        flux = max(flux, co.sum_rule_residual())
        routes = max(routes, sp.route_discrepancy, co.route_discrepancy)
    herm = 0.0
    for E in rng.uniform(0.1, 10.0, 5):
        v0, w = -rng.uniform(0.2, 2.0), rng.uniform(0.5, 3.0)
        p = PotentialSpec(1, [ConstantSegment(0.0, w, v0)], (-0.5, w + 0.5))
        t1 = scattering.scatter(p, E, params)[1].t1[0, 0]
        herm = max(herm, abs(t1 - textbook_square_well(E, v0, w, params)))
    return [SuiteResult("scattering.duality", dual, 1e-9),
            SuiteResult("scattering.flux_sum_rule", flux, 1e-9),
            SuiteResult("scattering.route_agreement", routes, 1e-9),
            SuiteResult("scattering.hermitian_reduction", herm, 1e-8)]


def _dynamics(rng, params):
    length, points = 10.0, 257
    grid = dynamics.box_grid(length, points)
    amp = complex(*rng.uniform(0.2, 1.0, 2))
    p = PotentialSpec(1, [ConstantSegment(4.0, 6.0, amp * 1j)], (0.0, length))
    fp = dynamics.FieldPair(grid, dynamics.gaussian_packet(grid, 3.0, 0.7, 1.0),
                            dynamics.gaussian_packet(grid, 3.0, 0.7, -1.0))
    traj = dynamics.evolve(fp, p, params, dt=0.01, steps=200)
    norm0 = traj[0].norm
    drift = max(abs(s.norm - norm0) for s in traj)
    ps = random_potential(rng, 2)
    sf = dynamics.solve_stationary(ps, transfer.energy_point(rng.uniform(0.5, 5.0), params),
                                   params, grid_density=256)
    return [SuiteResult("dynamics.norm_conservation", drift, 1e-10),
            SuiteResult("dynamics.current_constancy", dynamics.current_constancy(sf), 1e-6)]


def run_suites(seed: int = 0, params: PhysicalParams = PhysicalParams()) -> list:
    rng = np.random.default_rng(seed)
    return (_linalg(rng) + _potential(rng) + _transfer(rng, params)
            + _scattering(rng, params) + _dynamics(rng, params))
