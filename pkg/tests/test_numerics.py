from __future__ import annotations

import math

import numpy as np
import pytest

from kolwave.errors import (
    BracketError,
    FieldEvaluationError,
    PreconditionError,
    QuadratureError,
)
from kolwave.numerics import (
    EventSpec,
    Grid,
    cubic_real_roots,
    find_root,
    integrate_dde,
    integrate_ode,
    maximize_scalar,
    quad_adaptive,
)


def test_grid_nodes_and_invariants():
    g = Grid(t0=-1.0, dt=0.5, n=5)
    assert g.t_end == pytest.approx(1.0)
    assert np.allclose(g.nodes(), [-1.0, -0.5, 0.0, 0.5, 1.0])
    with pytest.raises(PreconditionError):
        Grid(0.0, -0.1, 5)
    with pytest.raises(PreconditionError):
        Grid(0.0, 0.1, 1)


def test_exponential_solution():
    traj, _ = integrate_ode(lambda t, y: y, [1.0], (0.0, 1.0), tol=1e-10)
    assert traj(1.0)[0] == pytest.approx(math.e, rel=1e-9)


def test_dense_output_matches_nodes_exactly():
    traj, _ = integrate_ode(lambda t, y: np.array([-y[0]]), [2.0], (0.0, 3.0), tol=1e-8)
    for i in range(len(traj.ts)):
        assert traj(traj.ts[i])[0] == traj.ys[i][0]


def test_halving_tol_does_not_worsen_exponential_error():
    errs = []
    for tol in (1e-6, 5e-7, 2.5e-7, 1.25e-7):
        traj, _ = integrate_ode(lambda t, y: y, [1.0], (0.0, 2.0), tol=tol)
        errs.append(abs(traj(2.0)[0] - math.e ** 2))
    assert all(a >= b - 1e-14 for a, b in zip(errs, errs[1:]))


def test_field_evaluation_error_on_nan():
    def bad(t, y):
        return np.array([math.nan])

    with pytest.raises(FieldEvaluationError):
        integrate_ode(bad, [0.0], (0.0, 1.0), tol=1e-8)


def test_tol_domain_guard():
    with pytest.raises(PreconditionError):
        integrate_ode(lambda t, y: y, [1.0], (0.0, 1.0), tol=0.5)


def test_level_crossing_event_on_logistic():
    # y' = y(1-y) from 0.01 crosses 1/2 at t = ln(99)
    ev = EventSpec("level-crossing", index=0, level=0.5, direction="up")
    traj, events = integrate_ode(
        lambda t, y: y * (1.0 - y), [0.01], (0.0, 12.0), tol=1e-10, events=[ev]
    )
    assert len(events) == 1
    assert events[0].direction == "up"
    assert events[0].time == pytest.approx(math.log(99.0), abs=1e-7)


def test_event_times_are_reproducible_bitwise():
    ev = EventSpec("level-crossing", index=0, level=0.5, direction="up")
    times = []
    for _ in range(2):
        _, events = integrate_ode(
            lambda t, y: y * (1.0 - y), [0.01], (0.0, 12.0), tol=1e-10, events=[ev]
        )
        times.append(events[0].time)
    assert times[0] == times[1]


def test_extremum_event_on_sine():
    # y = sin t has derivative sign change (down) at pi/2
    def f(t, y):
        return np.array([math.cos(t)])

    ev = EventSpec("derivative-sign-change", index=0, direction="down")
    _, events = integrate_ode(f, [0.0], (0.0, 3.0), tol=1e-10, events=[ev])
    assert len(events) == 1
    assert events[0].time == pytest.approx(math.pi / 2, abs=1e-8)


def test_terminal_event_truncates():
    ev = EventSpec("level-crossing", index=0, level=2.0, terminal=True)
    traj, events = integrate_ode(lambda t, y: y, [1.0], (0.0, 5.0), tol=1e-10, events=[ev])
    assert traj.t_end == pytest.approx(math.log(2.0), abs=1e-8)
    assert events[-1].time == pytest.approx(math.log(2.0), abs=1e-8)


def test_dde_cosine_fixture():
    # y'(t) = -y(t - pi/2) with history cos keeps the solution cos.
    tau = math.pi / 2
    traj, _ = integrate_dde(
        lambda t, y, lag: -lag.value,
        tau,
        lambda t: np.array([math.cos(t)]),
        (0.0, 4 * math.pi),
        tol=1e-9,
        history_deriv=lambda t: np.array([-math.sin(t)]),
    )
    ts = np.linspace(0.0, 4 * math.pi, 200)
    err = max(abs(traj(t)[0] - math.cos(t)) for t in ts)
    assert err < 1e-4


def test_dde_halving_tol_does_not_worsen_cosine_error():
    tau = math.pi / 2

    def run(tol):
        traj, _ = integrate_dde(
            lambda t, y, lag: -lag.value,
            tau,
            lambda t: np.array([math.cos(t)]),
            (0.0, 2 * math.pi),
            tol=tol,
            history_deriv=lambda t: np.array([-math.sin(t)]),
        )
        ts = np.linspace(0.0, 2 * math.pi, 100)
        return max(abs(traj(t)[0] - math.cos(t)) for t in ts)

    e1, e2 = run(1e-6), run(5e-7)
    assert e2 <= e1 + 1e-12


def test_dde_vector_system_rotation():
    # y1' = y2(t - 2pi), y2' = -y1(t - 2pi) keeps (cos t, -sin t) rotating
    tau = 2 * math.pi

    def field(t, y, lag):
        return np.array([lag.value[1], -lag.value[0]])

    traj, _ = integrate_dde(
        field, tau,
        lambda t: np.array([math.cos(t), -math.sin(t)]),
        (0.0, 6 * math.pi), tol=1e-9,
        history_deriv=lambda t: np.array([-math.sin(t), -math.cos(t)]),
    )
    for t in np.linspace(0.0, 6 * math.pi, 60):
        y = traj(t)
        assert abs(y[0] - math.cos(t)) < 1e-5
        assert abs(y[1] + math.sin(t)) < 1e-5


def test_dde_rejects_nonpositive_lag():
    with pytest.raises(PreconditionError):
        integrate_dde(lambda t, y, lag: -lag.value, 0.0, lambda t: [1.0], (0.0, 1.0))


def test_find_root_identity():
    assert find_root(lambda z: z, (-1.0, 1.0), 1e-14) == pytest.approx(0.0, abs=1e-13)


def test_find_root_double_root_reports_bracket_error():
    f = lambda z: z * z - 2 * z + 1
    with pytest.raises(BracketError):
        find_root(f, (0.9 + 1e-6, 1.1 - 1e-6), 1e-12)


def test_find_root_delay_characteristic_value():
    # larger real root of z + exp(-3z)/10 = 0, checked against a plain fine
    # bisection; [-1/3, 0] brackets exactly one sign change
    f = lambda z: z + math.exp(-3.0 * z) / 10.0
    root = find_root(f, (-1.0 / 3.0, 0.0), 1e-13)
    lo, hi = -1.0 / 3.0, 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if (f(lo) < 0) != (f(mid) < 0):
            hi = mid
        else:
            lo = mid
    assert root == pytest.approx(0.5 * (lo + hi), abs=1e-10)
    assert abs(f(root)) < 1e-12


def test_maximize_parabola():
    x, v = maximize_scalar(lambda a: a * (1 - a), (0.0, 1.0), 1e-10)
    assert x == pytest.approx(0.5, abs=1e-8)
    assert v == pytest.approx(0.25, abs=1e-12)


def test_maximize_barrier_function_constant():
    # min over (0,1) of x^2 + 2x + 2/x equals 4.729..., via the negated max
    x, v = maximize_scalar(lambda x: -(x * x + 2 * x + 2 / x), (1e-8, 1.0), 1e-10)
    assert -v == pytest.approx(4.729, abs=1e-3)
    # the minimiser solves x^3 + x^2 = 1
    assert x ** 3 + x ** 2 == pytest.approx(1.0, abs=1e-6)


def test_maximize_never_below_scan():
    rng = np.random.default_rng(7)
    for _ in range(5):
        coeffs = rng.normal(size=4)

        def f(x):
            return coeffs[0] * math.sin(3 * x) + coeffs[1] * x + coeffs[2] * x * x + coeffs[3]

        xs = np.linspace(-2.0, 2.0, 64)
        _, v = maximize_scalar(f, (-2.0, 2.0), 1e-9)
        assert v >= max(f(x) for x in xs) - 1e-14


def test_quad_exact_exponential_tail():
    val = quad_adaptive(lambda s: math.exp(-s), (0.0, math.inf), 1e-10)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_quad_two_sided():
    val = quad_adaptive(lambda s: math.exp(-abs(s)), (-math.inf, math.inf), 1e-10)
    assert val == pytest.approx(2.0, abs=1e-8)


def test_quad_finite_polynomial():
    val = quad_adaptive(lambda s: s * s, (0.0, 1.0), 1e-12)
    assert val == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_quad_error_on_hopeless_tail():
    with pytest.raises(QuadratureError):
        quad_adaptive(lambda s: 1.0 / (1.0 + abs(s)) ** 0.5, (0.0, math.inf), 1e-10)


def test_cubic_roots_three_real():
    # (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
    roots = cubic_real_roots(1.0, -6.0, 11.0, -6.0)
    assert np.allclose(roots, [1.0, 2.0, 3.0], atol=1e-10)


def test_cubic_roots_single_real():
    roots = cubic_real_roots(1.0, 0.0, 1.0, 0.0)  # x(x^2+1)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(0.0, abs=1e-12)


def test_cubic_degenerates_to_quadratic_and_linear():
    assert np.allclose(cubic_real_roots(0.0, 1.0, -3.0, 2.0), [1.0, 2.0])
    assert np.allclose(cubic_real_roots(0.0, 0.0, 2.0, -4.0), [2.0])
