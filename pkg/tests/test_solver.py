import numpy as np
import pytest

from gsqg_patches.errors import ConvergenceError, DomainError
from gsqg_patches.green import disc, free_space
from gsqg_patches.kr import VortexConfiguration, find_critical_points
from gsqg_patches.solver import (
    continue_in_eps,
    default_eps_max,
    default_rho0,
    newton_solve,
    residual,
    residual_terms,
    symmetry_directions,
    verify_solution,
)
from gsqg_patches.system import ContinuationState, Problem

GAMMA = 1.5
N = 12


@pytest.fixture(scope="module")
def pair(oracles):
    d = oracles["pair_dstar"]["1.5"]
    problem = Problem(disc(1.0, GAMMA), [1.0, 1.0], n=N)
    return problem, np.array([[d, 0.0], [-d, 0.0]])


@pytest.fixture(scope="module")
def pair_curve(pair):
    problem, x0 = pair
    return continue_in_eps(x0, problem, [0.005, 0.01, 0.02])


def test_kr_critical_point_solves_zero_size_system(pair):
    problem, x0 = pair
    st = ContinuationState.initial(x0, problem.kappas, GAMMA, N, 0.0)
    assert np.linalg.norm(residual(st, problem)) < 1e-9
    assert residual_terms(st, problem)["G1"] == 0.0


def test_off_critical_centers_have_center_residual(pair):
    problem, x0 = pair
    st = ContinuationState.initial(x0 * 0.9, problem.kappas, GAMMA, N, 0.0)
    r = residual(st, problem)
    assert np.linalg.norm(r[-4:]) > 1e-3
    assert np.allclose(r[:-4], 0.0, atol=1e-14)


def test_solutions_form_rotation_orbits(pair, pair_curve):
    problem, _ = pair
    st = pair_curve.states[-1]
    (p,) = symmetry_directions(st, problem)
    u = st.unknowns()
    # linearised rotation of a solution: residual is second order in the step
    r1, r2 = (np.linalg.norm(residual(st.with_unknowns(u + t * p), problem)) for t in (1e-3, 5e-4))
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_symmetry_directions_by_domain():
    st = ContinuationState.initial([[0.3, 0.0], [-0.3, 0.0]], [1.0, 1.0], GAMMA, 6, 0.0)
    assert len(symmetry_directions(st, Problem(disc(1.0, GAMMA), [1.0, 1.0], n=6))) == 1
    assert len(symmetry_directions(st, Problem(free_space(GAMMA), [1.0, 1.0], n=6))) == 3


def test_newton_converges_quadratically_from_perturbation(pair):
    problem, x0 = pair
    st = ContinuationState.initial(x0 + [[0.01, 0.0], [-0.01, 0.0]], problem.kappas, GAMMA, N, 0.0)
    sol, rep = newton_solve(st, problem, tol=1e-12)
    assert rep.converged and rep.gauge == 1
    assert np.allclose(np.abs(sol.centers[:, 0]), x0[0, 0], atol=1e-9)
    rn = rep.residual_norms
    # quadratic: log-ratio of successive reductions about 2
    k = next(i for i in range(2, len(rn)) if rn[i] < 1e-8)
    assert np.log(rn[k]) / np.log(rn[k - 1]) > 1.6


def test_newton_max_iter_raises(pair):
    problem, x0 = pair
    st = ContinuationState.initial(x0 * 0.8, problem.kappas, GAMMA, N, 0.0)
    with pytest.raises(ConvergenceError) as info:
        newton_solve(st, problem, tol=1e-14, max_iter=1)
    assert info.value.report.best_state is not None


def test_continuation_curve(pair, pair_curve):
    problem, x0 = pair
    res = pair_curve
    assert res.completed, res.message
    assert [s.eps for s in res.states] == [0.0, 0.005, 0.01, 0.02]
    for st in res.states[1:]:
        # reflection symmetry of the pair
        assert np.allclose(st.centers[0], -st.centers[1], atol=1e-10)
        assert np.allclose(st.shapes[0].vector * np.tile((-1.0) ** np.arange(2, N + 1), 2),
                           st.shapes[1].vector, atol=1e-10)
        v = verify_solution(st, problem, x0)
        assert v["residual_norm"] < 1e-10
        assert v["max_flux_relative_error"] < 1e-10
        assert v["all_curvature_positive"]
    # leading correction grows linearly in eps
    a2 = [abs(st.shapes[0].a[0]) for st in res.states[1:]]
    assert a2[2] / a2[1] == pytest.approx(2.0, rel=0.05)


def test_continuation_accepts_critical_point_seed(pair):
    problem, x0 = pair
    (cp,) = find_critical_points(problem.kernel, [VortexConfiguration(x0 * 1.01, problem.kappas)])
    res = continue_in_eps(cp, problem, [0.005])
    assert res.completed


def test_continuation_argument_checks(pair):
    problem, x0 = pair
    with pytest.raises(DomainError):
        continue_in_eps(x0, problem, [])
    with pytest.raises(DomainError):
        continue_in_eps(x0, problem, [0.02, 0.01])
    with pytest.raises(DomainError):
        continue_in_eps(x0, problem, [10 * default_eps_max(problem, x0)])
    with pytest.raises(DomainError):
        continue_in_eps(x0[:1], problem, [0.01])


def test_defaults(pair):
    problem, x0 = pair
    d = 2 * x0[0, 0]
    assert default_rho0(problem, x0) == pytest.approx(0.24 * d)
    assert default_eps_max(problem, x0) == pytest.approx(0.1 * d / np.sqrt(1 / np.pi))
    single = Problem(disc(1.0, GAMMA), [np.pi], n=6)
    assert default_rho0(single, [[0.0, 0.0]]) == pytest.approx(0.25)


def test_verify_solution_zero_size(pair, pair_curve):
    problem, _ = pair
    v = verify_solution(pair_curve.states[0], problem)
    assert v["max_flux_relative_error"] < 1e-14
    assert v["mode_leakage"] == 0.0
