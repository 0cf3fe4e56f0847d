"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""
import json
import math
import time

import numpy as np

from bilinscat import cli, output
from bilinscat.dynamics import Contour, current, current_constancy, solve_stationary
from bilinscat.ensembles import random_potential
from bilinscat.linalg import max_norm
from bilinscat.potential import (AnalyticSegment, ConstantSegment, DeltaSpike, PhysicalParams,
                                 PotentialSpec)
from bilinscat.scattering import find_singularities, scatter
from bilinscat.transfer import constant_segment_transfer, energy_point, ode_transfer

from conftest import delta_t1_closed_form, path_transfer, plane_wave_transmission

P = PhysicalParams()


def ensemble():
    """100 seeded potentials (n cycling 1, 2, 3; deltas, constant and analytic segments)."""
    rng = np.random.default_rng(20240601)
    return [(random_potential(rng, 1 + i % 3), float(rng.uniform(0.5, 5.0))) for i in range(100)]


def test_01_delta_closed_form(acceptance):
    rng = np.random.default_rng(1)
    energies = (0.25, 1.0, 4.0)
    gs = []
    while len(gs) < 200:
        g = 5.0 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        # away from the singular set 1 +- i g / (2 k0) = 0
        if min(abs(1 + s * 1j * g / (2 * energy_point(E).k0))
               for E in energies for s in (1, -1)) > 1e-2:
            gs.append(g)
    t0 = time.perf_counter()
    worst = 0.0
    for g in gs:
        for E in energies:
            e = energy_point(E, P)
            t1 = scatter(PotentialSpec(1, [DeltaSpike(0.0, g)], (0.0, 0.0)), e, P)[1].t1[0, 0]
            ref = delta_t1_closed_form(g, e.k0, P)
            worst = max(worst, abs(t1 - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    ok = acceptance(1, "delta closed form", worst <= 1e-10 and elapsed < 1.0,
                    f"max rel err {worst:.2e} <= 1e-10, {elapsed:.2f}s < 1s")
    assert ok


def test_02_duality(acceptance):
    t0 = time.perf_counter()
    worst = max(scatter(p, E, P)[0].duality_residual for p, E in ensemble())
    elapsed = time.perf_counter() - t0
    ok = acceptance(2, "S duality", worst <= 1e-9 and elapsed < 30.0,
                    f"max residual {worst:.2e} <= 1e-9, {elapsed:.2f}s < 30s")
    assert ok


def test_03_flux_sum_rule(acceptance):
    worst = max(scatter(p, E, P)[1].sum_rule_residual() for p, E in ensemble())
    ok = acceptance(3, "flux sum rule", worst <= 1e-9, f"max residual {worst:.2e} <= 1e-9")
    assert ok


def test_04_hermitian_reduction(acceptance):
    v0, width = -1.0, math.pi

    def textbook(E):
        kappa = math.sqrt(E - v0)  # 2M = hbar = 1
        return 1.0 / (1.0 + v0**2 * math.sin(kappa * width) ** 2 / (4.0 * E * (E - v0)))

    p = PotentialSpec(1, [ConstantSegment(0.0, width, v0)], (-0.5, width + 0.5))
    err = abs(scatter(p, 1.0, P)[1].t1[0, 0] - textbook(1.0))
    t1s = [scatter(p, E, P)[1].t1[0, 0] for E in np.linspace(0.1, 10.0, 102)[1:-1]]
    in_range = all(abs(t.imag) < 1e-12 and 0.0 <= t.real <= 1.0 for t in t1s)
    ok = acceptance(4, "Hermitian reduction", err <= 1e-8 and in_range,
                    f"|T1 - textbook| {err:.2e} <= 1e-8, T1 in [0,1] at 100 energies: {in_range}")
    assert ok


def test_05_ode_order(acceptance):
    e = energy_point(1.0, P)
    ref = constant_segment_transfer(ConstantSegment(0.0, math.pi, -1.0), e, P).data
    seg = AnalyticSegment(0.0, math.pi, "-1")
    errs = [max_norm(ode_transfer(seg, e, P, steps=s).data - ref) for s in (32, 64, 128)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = acceptance(5, "ODE convergence order", all(abs(q - 4.0) <= 0.3 for q in orders),
                    "orders " + ", ".join(f"{q:.3f}" for q in orders) + " within 4.0 +- 0.3")
    assert ok


def test_06_singularity_location(acceptance):
    rep = find_singularities(PotentialSpec(1, [DeltaSpike(0.0, 2j)], (0.0, 0.0)), P, (0.5, 2.0))
    err = abs(rep.energies[0] - 1.0) if len(rep.energies) == 1 else math.inf
    ok = acceptance(6, "spectral singularity at E = 1", err <= 1e-7,
                    f"found {rep.energies}, |E - 1| {err:.2e} <= 1e-7")
    assert ok


def test_07_norm_conservation(tmp_path, acceptance):
    doc = {"window": [0.5, 19.5],
           "potential": [{"type": "analytic", "from": 8, "to": 12, "expr": "i*exp(-(z-10)^2)"}],
           "evolve": {"length": 20, "points": 1024, "dt": 0.005, "steps": 1000,
                      "right": {"center": 6, "width": 1.0, "momentum": 2.0},
                      "left": {"center": 6, "width": 1.0, "momentum": -2.0}}}
    cfg, out = tmp_path / "evolve.json", tmp_path / "evolve.csv"
    cfg.write_text(json.dumps(doc))
    t0 = time.perf_counter()
    code = cli.main(["evolve", "--config", str(cfg), "--output", str(out), "--quiet"])
    elapsed = time.perf_counter() - t0
    rows = output.parse_csv(out.read_text())
    n0 = complex(rows[0]["norm_re"], rows[0]["norm_im"])
    drift = max(abs(complex(r["norm_re"], r["norm_im"]) - n0) for r in rows)
    ok = acceptance(7, "bilinear norm conservation",
                    code == 0 and len(rows) == 1001 and drift <= 1e-10 and elapsed < 60.0,
                    f"drift {drift:.2e} <= 1e-10 over 1000 steps, {elapsed:.2f}s < 60s")
    assert ok


def test_08_current_constancy_and_contour(acceptance):
    lo, hi = -0.5, 4.5
    p = PotentialSpec(1, [AnalyticSegment(0.0, 4.0, "i*0.3*exp(-(z-2)^2)")], (lo, hi))
    e = energy_point(1.0, P)
    bowed = [lo, 0.0, 2.0 + 0.3j, 4.0, hi]
    real = solve_stationary(p, e, P, grid_density=2048)
    curved = solve_stationary(p, e, P, grid_density=2048, contour=Contour.through(bowed))
    constancy = current_constancy(real)
    gap = abs(current(real, -1)[0, 0] - current(curved, -1)[0, 0])

    def v(z):
        return 0.3j * np.exp(-(z - 2) ** 2) if 0.0 <= z.real <= 4.0 else 0.0

    # independent adaptive integration of both sectors along the bowed path
    t = path_transfer(v, bowed, 1.0)
    j_oracle = 2.0 * plane_wave_transmission(t, 1.0, lo, hi) * plane_wave_transmission(t, -1.0, lo, hi)
    oracle_gap = abs(current(curved, -1)[0, 0] - j_oracle)
    ok = acceptance(8, "stationary current", constancy <= 1e-6 and gap <= 1e-5 and oracle_gap <= 1e-5,
                    f"constancy {constancy:.2e} <= 1e-6, contour gap {gap:.2e} <= 1e-5, "
                    f"oracle gap {oracle_gap:.2e}")
    assert ok


def test_09_nilpotent_multichannel(acceptance):
    worst, smallest_offdiag = 0.0, math.inf
    for gamma in (0.5, 1.0, 2.0):
        p = PotentialSpec(2, [DeltaSpike(0.0, [[0, gamma], [0, 0]])], (0.0, 0.0))
        sp, co = scatter(p, 1.0, P)
        worst = max(worst, max_norm(co.t1 - np.eye(2)), max_norm(co.r1))
        smallest_offdiag = min(smallest_offdiag, max_norm(sp.s_plus.b21), max_norm(sp.s_plus.b12))
    ok = acceptance(9, "nilpotent two-channel delta", worst <= 1e-12 and smallest_offdiag > 1e-3,
                    f"max |T1 - 1|, |R1| {worst:.2e} <= 1e-12, min off-diagonal S {smallest_offdiag:.2e}")
    assert ok


def test_10_determinism(tmp_path, acceptance):
    doc = {"channels": 2, "window": [0, 4],
           "potential": [{"type": "delta", "position": 0.5, "strength": [[[1, 1], 0], [2, [0, -1]]]},
                         {"type": "constant", "from": 1, "to": 2, "value": [[1, [0, 0.5]], [0, -1]]},
                         {"type": "analytic", "from": 2.5, "to": 3.5,
                          "expr": [["i*exp(-(z-3)^2)", "0.2*z"], ["0", "-1"]]}],
           "energies": {"linspace": {"start": 0.5, "stop": 5, "count": 40}}}
    cfg = tmp_path / "scan.json"
    cfg.write_text(json.dumps(doc))
    outputs, codes = [], []
    for name in ("a.csv", "b.csv"):
        codes.append(cli.main(["scan", "--config", str(cfg), "--output", str(tmp_path / name),
                               "--quiet"]))
        outputs.append((tmp_path / name).read_bytes())
    ok = acceptance(10, "deterministic scan output", codes == [0, 0] and outputs[0] == outputs[1],
                    f"exit codes {codes}, {len(outputs[0])} bytes, identical: {outputs[0] == outputs[1]}")
    assert ok
