import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hardy_adjoint.poly_rational import Poly, RationalMap

settings.register_profile(
    "default", deadline=None, max_examples=25, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

R = RationalMap.from_coeffs

LINEAR = R((1j, 2))  # 2z + i
LINEAR_REAL = R((1, 2))  # 2z + 1
SHIFT = R((1j, 1))  # z + i
EXAMPLE2 = R((-1, 0, 1), (0, 1))  # z - 1/z
MIXED = R((-1, 2j, 2), (1j, 1))  # 2z - 1/(z + i)
RECIP = R((-1,), (0, 1))  # -1/z
SQUARE = R((0, 0, 1))  # z^2
DILATION = R((0, 2))  # 2z


def pick_symbol(a: float, b: float, poles, masses) -> RationalMap:
    """a z + b - sum c_k / (z - p_k): a real self-map of the upper half-plane."""
    den = Poly.from_roots(list(poles)) if poles else Poly((1.0,))
    num = Poly((b, a)) * den
    for k, (p, c) in enumerate(zip(poles, masses)):
        others = [q for j, q in enumerate(poles) if j != k]
        num = num - (Poly.from_roots(others) if others else Poly((1.0,))) * c
    return RationalMap(num, den)


# real inner symbols z - 1/z shifted and rescaled
SHIFTED = [
    pick_symbol(1.0, 1.0, [0.0], [1.0]),  # z + 1 - 1/z
    pick_symbol(1.0, 0.0, [1.0], [1.0]),  # z - 1/(z - 1)
    pick_symbol(3.0, 0.0, [0.0], [2.0]),  # 3z - 2/z
]

BOUNDED_CORPUS = {
    "2z+i": LINEAR,
    "2z+1": LINEAR_REAL,
    "z+i": SHIFT,
    "z-1/z": EXAMPLE2,
    "2z-1/(z+i)": MIXED,
    "z+1-1/z": SHIFTED[0],
    "z-1/(z-1)": SHIFTED[1],
    "3z-2/z": SHIFTED[2],
}


@st.composite
def pick_symbols(draw, max_poles: int = 2):
    a = draw(st.floats(0.5, 3.0))
    b = draw(st.floats(-2.0, 2.0))
    k = draw(st.integers(0, max_poles))
    poles = sorted(draw(st.lists(st.floats(-3.0, 3.0), min_size=k, max_size=k)))
    if any(q - p < 0.3 for p, q in zip(poles, poles[1:])):
        poles = [p + 0.5 * j for j, p in enumerate(poles)]
    masses = draw(st.lists(st.floats(0.2, 2.0), min_size=k, max_size=k))
    return pick_symbol(a, b, poles, masses)


complex_numbers = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))
upper_points = st.builds(complex, st.floats(-3, 3), st.floats(0.2, 3))


@pytest.fixture(params=["python", "cython"])
def kernel_backend(request, monkeypatch):
    """Run a test against each kernel implementation."""
    from hardy_adjoint import _kernels_py, kernels

    if request.param == "cython":
        try:
            from hardy_adjoint import _kernels as mod
        except ImportError:
            pytest.skip("compiled kernels not built")
    else:
        mod = _kernels_py
    for name in ("horner", "rational", "poisson_atoms", "panel_nodes", "row_dot"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol


SQRT5 = math.sqrt(5.0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
