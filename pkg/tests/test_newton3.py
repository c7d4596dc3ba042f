import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbnb import Box, Cube, Problem, Status, dixon_szego, rastrigin
from qbnb.errors import ConstraintViolation
from qbnb.newton3 import NEWTON_FRACTION, newton_radii, regularizer_weight, rule_qbnb3

EPS = 1e-8


def quadratic_problem(H, L3=0.0, lo=-1.0, hi=1.0):
    H = np.asarray(H, float)
    d = H.shape[0]
    return Problem(domain=Box(np.full(d, lo), np.full(d, hi)), objective=lambda x: 0.5 * float(x @ H @ x),
                   gradient=lambda x: H @ x, hessian=lambda x: H, L2=float(np.linalg.norm(H)), L3=L3,
                   unconstrained=True)


def test_sphere_one_step_exact_gap():
    p = quadratic_problem(2 * np.eye(2))
    out = rule_qbnb3(p, Cube([0.0, 0.0], [0.1, 0.1]), EPS)
    assert out.status is Status.BOUNDED
    assert out.regularizer == 0.0
    # the first step lands on 0; the radius rule M/2 r_K^2 <= eps/200 with
    # M = 2, r = 0.1 sqrt 2 still certifies four steps
    assert out.n_newton == 4
    np.testing.assert_array_equal(out.sample, [0.0, 0.0])
    assert out.qlb == -EPS * NEWTON_FRACTION
    assert out.f_sample - out.qlb == EPS / 200


def test_regularizer_weight_example():
    assert regularizer_weight(-1.0, 2.0, 0.5) == 6.0
    assert regularizer_weight(3.0, 0.0, 1.0) == 0.0


def test_radii_sequence():
    assert newton_radii(1.0, 4) == [1.0, 0.5, 0.125, 0.0078125]


def test_negative_curvature_eliminates():
    p = quadratic_problem(np.diag([-5.0, 1.0]), L3=1.0, lo=-10, hi=10)
    out = rule_qbnb3(p, Cube([0.0, 0.0], [1 / math.sqrt(2)] * 2), EPS)
    assert out.status is Status.ELIMINATED and out.qlb == math.inf


def test_precheck_boundary_passes():
    # lambda_min = -1 = -L3 r exactly: the pre-check passes
    p = quadratic_problem(np.diag([-1.0, 1.0]), L3=2.0, lo=-10, hi=10)
    out = rule_qbnb3(p, Cube([0.0, 0.0], [0.5 / math.sqrt(2)] * 2), EPS)
    assert out.status is Status.BOUNDED
    assert out.regularizer == pytest.approx(6.0, rel=1e-14)


def test_far_minimizer_fails_certificate():
    # f = (x - 3)^2 on a cube around 0 of radius 0.5: Newton jumps to 3
    p = Problem(domain=Box([-10.0], [10.0]), objective=lambda x: float((x[0] - 3) ** 2),
                gradient=lambda x: 2 * (x - 3), hessian=lambda x: np.array([[2.0]]), L3=0.0, unconstrained=True)
    out = rule_qbnb3(p, Cube([0.0], [0.5]), EPS)
    assert out.status is Status.ELIMINATED


def test_ball_outside_domain_unbounded():
    p = quadratic_problem(2 * np.eye(2))
    out = rule_qbnb3(p, Cube([0.95, 0.0], [0.05, 0.05]), EPS)
    assert out.status is Status.UNBOUNDED and out.qlb == -math.inf


def test_requires_unconstrained():
    p = dixon_szego("branin")
    import dataclasses
    with pytest.raises(ConstraintViolation):
        rule_qbnb3(dataclasses.replace(p, unconstrained=False), p.domain.to_cube(), EPS)


def test_deterministic():
    p = rastrigin(2)
    c = Cube([0.01, -0.02], [0.004, 0.004])
    a, b = rule_qbnb3(p, c, EPS), rule_qbnb3(p, c, EPS)
    assert a.qlb == b.qlb
    np.testing.assert_array_equal(a.sample, b.sample)


class Recorder:
    def __init__(self, fn):
        self.fn = fn
        self.points = []

    def __call__(self, x):
        self.points.append(np.array(x))
        return self.fn(x)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["rastrigin", "branin", "camelback"]), st.integers(0, 2**32 - 1))
def test_third_order_gap_and_iterate_containment(name, seed):
    import dataclasses

    base = rastrigin(2) if name == "rastrigin" else dixon_szego(name)
    grad = Recorder(base.gradient)
    p = dataclasses.replace(base, gradient=grad)
    rng = np.random.default_rng(seed)
    r_target = 10 ** rng.uniform(-5, -1.5)
    h = np.full(2, r_target / math.sqrt(2))
    c = Cube(p.domain.lower + 2 * r_target + rng.uniform(size=2) * (p.domain.upper - p.domain.lower - 4 * r_target), h)
    out = rule_qbnb3(p, c, EPS)
    for x in grad.points:
        assert np.linalg.norm(x - c.center) <= 2 * c.radius * (1 + 1e-12)
    if out.status is Status.BOUNDED:
        assert out.f_sample - out.qlb <= 3 * p.L3 * c.radius ** 3 + EPS / 200 + 1e-12


def test_cubes_around_minimizer_never_eliminated(rng):
    p = rastrigin(2)
    for _ in range(300):
        r = 10 ** rng.uniform(-6, -0.5)
        h = np.full(2, r / math.sqrt(2))
        c = Cube(rng.uniform(-1, 1, size=2) * h, h)
        out = rule_qbnb3(p, c, EPS)
        assert out.status is not Status.ELIMINATED
        if out.status is Status.BOUNDED:
            assert out.qlb <= 1e-12


def test_eventual_exactness_near_minimizer():
    p = rastrigin(2)
    for r in (1e-3, 1e-4, 1e-6):
        h = np.full(2, r / math.sqrt(2))
        out = rule_qbnb3(p, Cube(0.3 * h, h), EPS)
        assert out.regularizer == 0.0
        assert out.f_sample - out.qlb == pytest.approx(EPS / 200, rel=1e-6)
