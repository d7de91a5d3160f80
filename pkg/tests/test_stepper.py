import math

import numpy as np
import pytest

from kgspectral import diagnostics, problems, stepper
from kgspectral.errors import ContractError, DivergenceError, NonConvergenceError
from kgspectral.problems import Nonlinearity, ProblemSpec
from kgspectral.spectral import GridSpec, RealCoeffs, analyze
from kgspectral.stepper import SolverParams, SpectralState, evolve, fixed_point_sweep, step


def flat(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def make_problem(alpha=-1.0, beta=1.0, nl=None, L=8.0):
    return ProblemSpec("test", alpha, beta, nl or Nonlinearity.linear(), L, flat, flat)


def random_state(rng, N, scale=1.0):
    vec = scale * rng.standard_normal(4 * N + 2)
    return SpectralState.from_vector(vec)


def linear_run(N, dt, theta=0.5, T=1.0):
    prob = problems.linear_kg()
    grid = prob.default_grid(N)
    state = evolve(stepper.initial_state(prob, grid), T, SolverParams(theta=theta, dt=dt), prob, grid)
    eu, ev = diagnostics.state_errors(state, prob, grid)
    return eu.max_error, ev.max_error


def test_params_validation():
    with pytest.raises(ContractError):
        SolverParams(theta=1.5)
    with pytest.raises(ContractError):
        SolverParams(dt=0.0)
    with pytest.raises(ContractError):
        SolverParams(fp_tol=0.0)
    with pytest.raises(ContractError):
        SolverParams(fp_max_iter=0)


def test_state_mode_mismatch():
    with pytest.raises(ContractError):
        SpectralState(RealCoeffs.zeros(3), RealCoeffs.zeros(4))


def test_sweep_at_origin_is_zero():
    prob = make_problem(nl=Nonlinearity.zero())
    g = GridSpec(8.0, 4, 16)
    z = SpectralState(RealCoeffs.zeros(4), RealCoeffs.zeros(4))
    out = fixed_point_sweep(z, z, SolverParams(dt=0.1), prob, g)
    assert np.array_equal(out.to_vector(), np.zeros(18))


def test_explicit_sweep_is_euler_and_ignores_guess():
    rng = np.random.default_rng(0)
    N, L, dt = 4, 8.0, 0.01
    prob = make_problem(L=L)
    g = GridSpec(L, N, 16)
    s = random_state(rng, N)
    p = SolverParams(theta=0.0, dt=dt)
    out1 = fixed_point_sweep(s, random_state(rng, N), p, prob, g)
    out2 = fixed_point_sweep(s, random_state(rng, N), p, prob, g)
    assert np.array_equal(out1.to_vector(), out2.to_vector())
    k2 = (2 * np.pi * np.arange(1, N + 1) / L) ** 2
    u, v = s.u, s.v
    # u_t = v, v_t = -k^2 u - u  (alpha = -1, beta = 1, F = u)
    assert out1.u.zero_mode == pytest.approx(u.zero_mode + dt * v.zero_mode, abs=1e-15)
    assert out1.v.zero_mode == pytest.approx(v.zero_mode - dt * u.zero_mode, abs=1e-15)
    assert np.allclose(out1.u.cos_modes, u.cos_modes + dt * v.cos_modes, atol=1e-15)
    assert np.allclose(out1.u.sin_modes, u.sin_modes + dt * v.sin_modes, atol=1e-15)
    assert np.allclose(out1.v.cos_modes, v.cos_modes - dt * (k2 + 1) * u.cos_modes, atol=1e-14)
    assert np.allclose(out1.v.sin_modes, v.sin_modes - dt * (k2 + 1) * u.sin_modes, atol=1e-14)
    stepped, report = step(s, p, prob, g)
    assert np.array_equal(stepped.to_vector(), out1.to_vector())
    assert report.iterations_used == 1


def test_single_mode_sweep_two_by_two():
    N, L, dt = 4, 8.0, 0.05
    prob = make_problem(L=L)
    g = GridSpec(L, N, 16)
    a1, c1 = 0.3, 0.7
    s = SpectralState(RealCoeffs(0, [a1, 0, 0, 0], np.zeros(4)), RealCoeffs(0, [c1, 0, 0, 0], np.zeros(4)))
    out = fixed_point_sweep(s, s, SolverParams(theta=0.5, dt=dt), prob, g)
    w2 = (2 * math.pi / L) ** 2 + 1
    # with guess = state_n the theta-weights sum to one
    M = np.array([[1.0, dt], [-dt * w2, 1.0]])
    a_new, c_new = M @ [a1, c1]
    assert out.u.cos_modes[0] == pytest.approx(a_new, abs=1e-15)
    assert out.v.cos_modes[0] == pytest.approx(c_new, abs=1e-15)
    assert np.all(out.u.cos_modes[1:] == 0) and np.all(out.v.sin_modes == 0)


def test_free_drift():
    prob = make_problem(alpha=0.0, beta=0.0, nl=Nonlinearity.zero())
    g = GridSpec(8.0, 3, 8)
    s = SpectralState(RealCoeffs(1.0, [0.5, 0, 0], np.zeros(3)), RealCoeffs(2.0, [0.1, 0, 0], np.zeros(3)))
    out, rep = step(s, SolverParams(dt=0.25), prob, g)
    assert out.u.zero_mode == 1.0 + 0.25 * 2.0
    assert out.v.zero_mode == 2.0
    assert out.u.cos_modes[0] == pytest.approx(0.5 + 0.025)
    assert rep.converged
    assert out.time == 0.25


def exact_coeffs_linear(t, N, L=8.0):
    w = math.sqrt(1 + (2 * math.pi / L) ** 2)
    a = np.zeros(N)
    c = np.zeros(N)
    a[0], c[0] = math.sin(w * t) / w, math.cos(w * t)
    return np.concatenate(([0.0], a, np.zeros(N), [0.0], c, np.zeros(N)))


def test_local_error_is_third_order():
    prob = problems.linear_kg()
    g = prob.default_grid(32)
    s0 = stepper.initial_state(prob, g)
    devs = []
    for e in (6, 7, 8):
        dt = 2.0**-e
        s1, _ = step(s0, SolverParams(dt=dt), prob, g)
        devs.append(np.abs(s1.to_vector() - exact_coeffs_linear(dt, 32)).max())
    w = math.sqrt(1 + (math.pi / 4) ** 2)
    assert devs[-1] <= w**3 * (2.0**-8) ** 3
    for d0, d1 in zip(devs, devs[1:]):
        assert 2.8 <= math.log2(d0 / d1) <= 3.2


def test_converged_step_solves_implicit_system():
    rng = np.random.default_rng(4)
    for nl, prob_L in ((Nonlinearity.linear(), 8.0), (Nonlinearity.sine_gordon(), 6.0)):
        prob = make_problem(nl=nl, L=prob_L)
        g = GridSpec.auto(prob_L, 8, nl.degree_bound)
        s = random_state(rng, 8, 0.3)
        p = SolverParams(dt=0.01)
        s1, rep = step(s, p, prob, g)
        assert rep.converged and rep.final_residual <= rep.tolerance
        assert stepper.implicit_residual(s, s1, p, prob, g) <= rep.tolerance


def test_repeated_sweeps_reach_step_result():
    rng = np.random.default_rng(8)
    prob = make_problem(nl=Nonlinearity.sine_gordon(), L=6.0)
    g = GridSpec.auto(6.0, 8, 3)
    s = random_state(rng, 8, 0.3)
    p = SolverParams(dt=0.02)
    guess = s
    for _ in range(40):
        guess = fixed_point_sweep(s, guess, p, prob, g)
    s1, _ = step(s, p, prob, g)
    assert np.abs(guess.to_vector() - s1.to_vector()).max() <= 1e-13


def test_fixed_point_contraction_rate():
    # Picard matrix per mode is theta*dt*[[0, 1], [-w^2, 0]]; two sweeps scale errors by (theta*dt*w)^2
    rng = np.random.default_rng(9)
    N, L, dt = 8, 8.0, 0.05
    prob = make_problem(L=L)
    g = GridSpec(L, N, 17)
    s = random_state(rng, N)
    p = SolverParams(dt=dt)
    rho2 = (0.5 * dt) ** 2 * ((2 * math.pi * N / L) ** 2 + 1)
    assert rho2 < 1
    guess, changes = s, []
    for _ in range(12):
        new = fixed_point_sweep(s, guess, p, prob, g)
        changes.append(np.abs(new.to_vector() - guess.to_vector()).max())
        guess = new
    checked = 0
    for c0, c2 in zip(changes, changes[2:]):
        if c2 > 1e-12:
            assert c2 / c0 <= rho2 * (1 + 1e-6)
            checked += 1
    assert checked >= 4


def test_trapezoidal_rotation_conserves_mode_energy():
    rng = np.random.default_rng(12)
    N, L = 8, 2 * math.pi
    prob = make_problem(alpha=-1.0, beta=0.0, nl=Nonlinearity.zero(), L=L)
    g = GridSpec(L, N, 17)
    k2 = (2 * math.pi * np.arange(1, N + 1) / L) ** 2

    def invariant(s):
        return (
            np.sum(k2 * (s.u.cos_modes**2 + s.u.sin_modes**2)) + np.sum(s.v.cos_modes**2 + s.v.sin_modes**2) + s.v.zero_mode**2
        )

    s0 = random_state(rng, N)
    p = SolverParams(dt=0.01)
    s1 = evolve(s0, 1000 * p.dt, p, prob, g)
    assert abs(invariant(s1) / invariant(s0) - 1) <= 1e-12


@pytest.mark.parametrize("theta", [0.0, 1.0])
def test_first_order_for_euler_thetas(theta):
    errs = [(2.0**-e, linear_run(8, 2.0**-e, theta=theta)) for e in range(6, 10)]
    pu = diagnostics.observed_order([(dt, e[0]) for dt, e in errs])
    pv = diagnostics.observed_order([(dt, e[1]) for dt, e in errs])
    assert all(0.8 <= p <= 1.2 for p in pu + pv), (pu, pv)


def test_evolve_trivial_and_observer_count():
    prob = problems.linear_kg()
    g = prob.default_grid(8)
    s0 = stepper.initial_state(prob, g)
    p = SolverParams(dt=2.0**-6)
    assert evolve(s0, 0.0, p, prob, g) is s0
    calls = []
    s1 = evolve(s0, 0.5, p, prob, g, observer=lambda s, r: calls.append((s.time, r.converged)))
    assert len(calls) == 32
    assert all(ok for _, ok in calls)
    assert calls[-1][0] == 0.5 == s1.time


def test_evolve_rejects_non_multiple():
    prob = problems.linear_kg()
    g = prob.default_grid(8)
    with pytest.raises(ContractError):
        evolve(stepper.initial_state(prob, g), 0.3, SolverParams(dt=0.25), prob, g)


def test_evolve_linear_full_run():
    eu, ev = linear_run(32, 2.0**-10)
    assert eu <= 1e-5 and ev <= 1e-5


def test_n_independence_where_iteration_converges():
    # theta*dt*k_N = 0.785 for N = 2^10 at dt = 2^-9
    small = linear_run(32, 2.0**-9)
    large = linear_run(1024, 2.0**-9)
    for s, l in zip(small, large):
        assert 0.5 <= s / l <= 2.0


def test_nonconvergence_is_reported_with_step_index():
    prob = problems.linear_kg()
    g = prob.default_grid(1024)
    with pytest.raises(NonConvergenceError) as info:
        evolve(stepper.initial_state(prob, g), 1.0, SolverParams(dt=2.0**-8), prob, g)
    assert info.value.step_index is not None and info.value.step_index >= 1
    assert info.value.iterations == 100
    assert info.value.residual > 1e-14


def test_divergence_to_overflow():
    prob = problems.linear_kg()
    g = prob.default_grid(1024)
    with pytest.raises(DivergenceError):
        step(stepper.initial_state(prob, g), SolverParams(dt=1.0, fp_max_iter=10_000), prob, g)


def test_grid_problem_mismatch():
    prob = problems.linear_kg()
    g = GridSpec(6.0, 8, 17)
    with pytest.raises(ContractError):
        step(SpectralState(RealCoeffs.zeros(8), RealCoeffs.zeros(8)), SolverParams(), prob, g)
