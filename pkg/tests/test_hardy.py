import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardy_adjoint.hardy import (
    BoundaryFunction,
    combine,
    compose,
    f_p,
    g_p,
    h2_norm,
    inner_product,
    integrate,
    integrate_result,
    kernel_K,
    kernel_k,
    poisson,
    poisson_extend,
    reproduce,
)
from hardy_adjoint.quadrature import QuadratureConfig, break_points, graded_points, integrate_line

from conftest import EXAMPLE2, LINEAR, R, close

LIBRARY = {
    "g_2": g_p(2),
    "K_i": kernel_K(1j),
    "K_1+2i": kernel_K(1 + 2j),
    "k_i": kernel_k(1j),
    "P_0,1": poisson(0, 1),
    "P_2,0.5": poisson(2, 0.5),
    "f_2": f_p(2),
}
W_GRID = [1j, 0.5 + 2j, -1 + 0.5j]
Z_GRID = [complex(x, y) for x in (-2, 0, 1.5) for y in (0.3, 1, 3)]


# -- config and quadrature ---------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(base_nodes=16)
    with pytest.raises(ValueError):
        QuadratureConfig(tol=0)
    assert QuadratureConfig() == QuadratureConfig(256, 1e-10, 6)


def test_integrate_line_examples():
    res = integrate_line(lambda t: 1 / (1 + t * t))
    assert res.converged and abs(res.value - math.pi) <= 1e-12
    assert abs(integrate(poisson(0, 1)) - 1) <= 1e-12
    Ki = kernel_K(1j)
    assert abs(integrate(BoundaryFunction(lambda t: np.abs(Ki.evaluator(t)) ** 2, 2.0)) - 1 / (4 * math.pi)) <= 1e-13


def test_integrate_rejects_slow_decay():
    with pytest.raises(ValueError):
        integrate(g_p(2))


def test_nonconvergence_is_flagged():
    res = integrate_line(lambda t: np.sin(200 * t) / (1 + t * t), QuadratureConfig(base_nodes=32, max_doublings=0))
    assert not res.converged and res.error > 0


def test_break_points_sorted_unique():
    b = break_points([1.0, 1.0, -2.0], [0.5 + 1e-3j])
    assert np.all(np.diff(b) > 0)
    assert 1.0 in b and -2.0 in b and 0.5 in b


def test_graded_points_scale():
    pts = graded_points(0.0, 1e-4)
    assert min(abs(p) for p in pts if p) == pytest.approx(1e-4)
    assert max(pts) >= 1.0


@pytest.mark.parametrize("x", np.linspace(-10, 10, 5))
@pytest.mark.parametrize("y", np.geomspace(0.1, 10, 5))
def test_poisson_unit_mass(x, y):
    assert abs(integrate(poisson(x, y)) - 1) <= 1e-10


def test_near_axis_peak_resolved():
    # narrow Lorentzian of width 1e-6 at 0.3
    res = integrate_line(lambda t: 1e-6 / ((t - 0.3) ** 2 + 1e-12), features=[0.3 + 1e-6j])
    assert res.converged and abs(res.value - math.pi) <= 1e-9


# -- library -----------------------------------------------------------------


@pytest.mark.parametrize("f, decay", [(poisson(0, 1), 2), (kernel_k(1j), 1), (f_p(2), 1), (g_p(2), 1), (kernel_K(1j), 1)])
def test_library_decay(f, decay):
    assert f.decay == decay
    t = np.array([1e3, 1e4])
    ratio = np.abs(f(t[1])) / np.abs(f(t[0]))
    assert ratio == pytest.approx(10.0**-decay, rel=1e-2)


def test_library_rejects_lower_points():
    for ctor in (kernel_k, kernel_K):
        with pytest.raises(ValueError):
            ctor(1.0)
    with pytest.raises(ValueError):
        poisson(0, 0)


def test_g_p_general_branch():
    assert close(g_p(4)(0), (1j) ** -0.5, 1e-15)
    assert g_p(4).decay == 0.5


# -- inner products and norms ------------------------------------------------


def test_inner_product_examples():
    assert close(inner_product(kernel_K(1j), kernel_K(1j)), 1 / (4 * math.pi), 1e-13)
    assert close(inner_product(g_p(2), g_p(2)), math.pi, 1e-11)


def test_norm_examples():
    assert abs(h2_norm(g_p(2)) - math.sqrt(math.pi)) <= 1e-11
    assert abs(h2_norm(kernel_K(1j)) - 1 / (2 * math.sqrt(math.pi))) <= 1e-13
    assert abs(h2_norm(3j * g_p(2)) - 3 * math.sqrt(math.pi)) <= 1e-10


def test_norm_rejects_non_l2():
    with pytest.raises(ValueError):
        h2_norm(g_p(4))


@given(st.sampled_from(sorted(LIBRARY)), st.sampled_from(sorted(LIBRARY)))
def test_conjugate_symmetry(a, b):
    f, g = LIBRARY[a], LIBRARY[b]
    fg, gf = inner_product(f, g), inner_product(g, f)
    assert abs(fg - gf.conjugate()) <= 1e-12 * (1 + abs(fg))


@given(st.sampled_from(sorted(LIBRARY)), st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)))
def test_norm_positive_and_homogeneous(name, c):
    f = LIBRARY[name]
    n = h2_norm(f)
    assert n > 0
    assert abs(h2_norm(c * f) - abs(c) * n) <= 1e-9 * (1 + abs(c) * n)


def test_combine_metadata():
    h = combine([(1.0, g_p(2)), (2.0, poisson(0, 1))])
    assert h.decay == 1.0 and not h.analytic
    assert close(h(0.0), g_p(2)(0.0) + 2 / math.pi, 1e-15)


# -- reproducing property ----------------------------------------------------


def test_reproduce_examples():
    assert close(reproduce(g_p(2), 1j, "poisson"), -0.5j, 1e-12)
    assert close(reproduce(g_p(2), 1 + 2j, "cauchy"), 1 / (1 + 3j), 1e-12)
    assert close(reproduce(kernel_K(2j), 1j, "cauchy"), 1 / (6 * math.pi), 1e-13)
    assert close(kernel_K(2j)(1j), 1 / (6 * math.pi), 1e-16)


@pytest.mark.parametrize("mode", ["poisson", "cauchy"])
@pytest.mark.parametrize("fname", ["g_2"] + [f"K_{w}" for w in W_GRID])
@pytest.mark.parametrize("z", Z_GRID)
def test_reproducing_property(mode, fname, z):
    f = g_p(2) if fname == "g_2" else kernel_K(complex(fname[2:]))
    fz = f(z)
    assert abs(reproduce(f, z, mode) - fz) <= 1e-8 * (1 + abs(fz))


def test_reproduce_errors():
    with pytest.raises(ValueError):
        reproduce(g_p(2), 1.0)
    with pytest.raises(ValueError):
        reproduce(g_p(2), 1j, "laplace")


# the inner extension is itself a quadrature, so its noise floor stalls refinement
@pytest.mark.filterwarnings("ignore::hardy_adjoint.hardy.NonConvergenceWarning")
@pytest.mark.parametrize("name", ["g_2", "K_i", "P_0,1"])
def test_poisson_semigroup(name):
    f = LIBRARY[name]
    y1, y2 = 0.4, 0.7
    once = poisson_extend(poisson_extend(f, y1), y2)
    both = poisson_extend(f, y1 + y2)
    x = np.array([-1.3, 0.0, 0.8])
    assert np.max(np.abs(once(x) - both(x))) <= 1e-7


# -- composition -------------------------------------------------------------


def test_compose_examples():
    assert close(compose(LINEAR, f_p(2))(0.0), 0.5, 1e-15)
    assert 0.0 in compose(EXAMPLE2, g_p(2)).poles
    ident = compose(R((0, 1)), g_p(2))
    t = np.linspace(-20, 20, 100)
    assert np.allclose(ident(t), g_p(2)(t), rtol=0, atol=1e-15)


def test_compose_inherits_decay():
    h = compose(EXAMPLE2, kernel_K(1j))
    assert h.decay == 1.0 and h.analytic


@pytest.mark.parametrize("f", [g_p(2), kernel_K(1j), kernel_K(1 + 1j)], ids=["g_2", "K_i", "K_1+i"])
def test_inner_symbol_isometry(f):
    assert abs(h2_norm(compose(EXAMPLE2, f)) / h2_norm(f) - 1) <= 1e-6


def test_integrate_result_diagnostics():
    res = integrate_result(poisson(0, 1))
    assert res.converged and res.evaluations > 0 and res.error <= 1e-10
