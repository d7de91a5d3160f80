import math

import numpy as np
import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def direct_series(a0, cos_modes, sin_modes, x, L):
    """Scalar-loop evaluation of a truncated real Fourier series (test oracle)."""
    out = []
    for xj in x:
        s = a0
        for l, (a, b) in enumerate(zip(cos_modes, sin_modes), start=1):
            s += a * math.cos(2 * math.pi * l * xj / L) + b * math.sin(2 * math.pi * l * xj / L)
        out.append(s)
    return np.array(out)


def direct_quadrature(samples, N, L):
    """Scalar-loop trapezoidal Fourier coefficients (test oracle)."""
    J = len(samples)
    xs = [j * L / J for j in range(J)]
    a0 = sum(samples) / J
    a = [2 / J * sum(f * math.cos(2 * math.pi * l * x / L) for f, x in zip(samples, xs)) for l in range(1, N + 1)]
    b = [2 / J * sum(f * math.sin(2 * math.pi * l * x / L) for f, x in zip(samples, xs)) for l in range(1, N + 1)]
    return a0, np.array(a), np.array(b)
