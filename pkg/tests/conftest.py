import numpy as np
import pytest

ACCEPTANCE_LINES = []

from bilinscat.potential import PhysicalParams


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def delta_t1_closed_form(g, k0, params=PhysicalParams()):
    """Scalar bilinear transmittivity of g*delta(z-a): 1 / ((1 - x/2i)(1 + x/2i)), x = 2M g / hbar^2 k0."""
    x = params.kinetic * g / k0
    return 1.0 / ((1 - x / 2j) * (1 + x / 2j))


def path_transfer(vfun, nodes, E, kinetic=1.0):
    """Scalar 2x2 fundamental matrix along a piecewise-linear complex path (adaptive DOP853)."""
    from scipy.integrate import solve_ivp

    y = np.eye(2, dtype=complex)
    for za, zb in zip(nodes, nodes[1:]):
        za, dz = complex(za), complex(zb) - complex(za)

        def rhs(s, u, za=za, dz=dz):
            u = u.reshape(2, 2)
            return (np.array([u[1], kinetic * (vfun(za + s * dz) - E) * u[0]]) * dz).reshape(-1)

        sol = solve_ivp(rhs, (0.0, 1.0), y.reshape(-1), method="DOP853", rtol=1e-12, atol=1e-14)
        y = sol.y[:, -1].reshape(2, 2)
    return y


def plane_wave_transmission(t, k, lo, hi):
    """Amplitude ``tau`` with ``t (e^{ikz} + r e^{-ikz})|_lo = tau e^{ikz}|_hi`` (values and slopes)."""
    def wave(q, z):
        return np.array([np.exp(1j * q * z), 1j * q * np.exp(1j * q * z)])

    a = np.column_stack([t @ wave(-k, lo), -wave(k, hi)])
    _, tau = np.linalg.solve(a, -(t @ wave(k, lo)))
    return tau


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion; lines are repeated in the terminal summary."""
    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
