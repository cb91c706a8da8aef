"""Tests for estimators.py: simulation, estimates, closed-form errors."""

import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from optev import (
    OutcomeSequence,
    PureState,
    analytic_bias_mean,
    analytic_delta_av,
    analytic_delta_av_conditional,
    analytic_delta_mixed_qubit,
    analytic_delta_opt,
    analytic_second_moment,
    derive_stream,
    estimate_optimal,
    estimate_optimal_mixed_qubit,
    estimate_sample_average,
    expectation,
    make_observable,
    omega_hat,
    outcome_distribution,
    sample_haar_amplitudes,
    simulate_measurements,
)
from optev.estimators import _draw_indices


def random_observable(d, rng):
    raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return make_observable((raw + raw.conj().T) / 2)


def sequence(obs, indices):
    indices = np.asarray(indices, dtype=np.intp)
    return OutcomeSequence(indices=indices, values=obs.eigenvalues[indices])


SIGMA_Z = make_observable([[1, 0], [0, -1]])


# --- simulate_measurements ---

def test_eigenstate_outcomes_are_deterministic():
    out = simulate_measurements(PureState(np.array([1.0, 0.0])), SIGMA_Z, 5, derive_stream(1, 0))
    assert np.array_equal(out.indices, np.zeros(5))
    assert np.array_equal(out.values, np.ones(5))


def test_equator_outcome_frequency():
    plus = PureState(np.array([1.0, 1.0]) / np.sqrt(2))
    out = simulate_measurements(plus, SIGMA_Z, 1_000_000, derive_stream(2, 0))
    fraction = float((out.values > 0).mean())
    assert abs(fraction - 0.5) < 0.0015  # 3 sigma binomial


def test_degenerate_identity_observable():
    obs = make_observable(np.eye(3))
    state = PureState(np.array([0.6, 0.8, 0.0], dtype=complex))
    out = simulate_measurements(state, obs, 4, derive_stream(3, 0))
    assert np.array_equal(out.values, np.ones(4))


def test_zero_measurements_rejected():
    with pytest.raises(ValueError):
        simulate_measurements(PureState(np.array([1.0, 0.0])), SIGMA_Z, 0, derive_stream(4, 0))


def test_draw_indices_never_picks_zero_probability():
    p = np.array([0.5, 0.0, 0.5])
    idx = _draw_indices(p, 10_000, derive_stream(5, 0).generator)
    assert not (idx == 1).any()
    assert idx.max() <= 2


# --- point estimators ---

def test_sample_average_values():
    assert estimate_sample_average(sequence(SIGMA_Z, [0])) == 1.0
    assert estimate_sample_average(sequence(SIGMA_Z, [0, 1, 0, 1])) == 0.0
    obs = make_observable(np.diag([2.0, 5.0, 2.0]))  # eigenvalues sorted: 5, 2, 2
    assert estimate_sample_average(sequence(obs, [1, 2, 0])) == 3.0


def test_sample_average_rejects_empty():
    with pytest.raises(ValueError):
        estimate_sample_average(OutcomeSequence(indices=np.array([], dtype=int), values=np.array([])))


def test_optimal_single_qubit_outcome_is_one_third():
    assert estimate_optimal(sequence(SIGMA_Z, [0]), SIGMA_Z) == 1 / 3


def test_optimal_identity_observable_always_one():
    obs = make_observable(np.eye(4))
    assert estimate_optimal(sequence(obs, [0, 2, 3]), obs) == 1.0


def test_optimal_d3_example_matches_shrinkage_operator():
    obs = make_observable(np.diag([3.0, 0.0, -3.0]))
    est = estimate_optimal(sequence(obs, [0, 0]), obs)
    assert est == pytest.approx(1.2, abs=1e-15)
    # the shrinkage operator's eigenvalue on |00> is the same number
    hat = omega_hat(obs, 2)
    basis = np.kron(obs.eigenvectors[:, 0], obs.eigenvectors[:, 0])
    assert abs(float((basis.conj() @ hat @ basis).real) - est) < 1e-12


def test_mixed_estimator_reduces_to_pure_at_full_moment():
    assert estimate_optimal_mixed_qubit(sequence(SIGMA_Z, [0]), SIGMA_Z, 1.0) == pytest.approx(
        1 / 3, abs=1e-15
    )


def test_mixed_estimator_ignores_data_at_zero_moment():
    rng = np.random.default_rng(6)
    for _ in range(10):
        obs = random_observable(2, rng)
        for index in (0, 1):
            est = estimate_optimal_mixed_qubit(sequence(obs, [index]), obs, 0.0)
            assert est == obs.trace / 2  # exactly: data weight is zero


def test_mixed_estimator_example_value():
    est = estimate_optimal_mixed_qubit(sequence(SIGMA_Z, [0]), SIGMA_Z, 0.6)
    assert est == pytest.approx(0.2, abs=1e-15)


def quadrature_bayes_estimates(obs, n2):
    """Per-outcome estimates minimizing the ensemble MSE, by quadrature.

    For a fixed-radius isotropic ensemble the optimum is the conditional
    mean <p_i t> / <p_i>, reduced to a 1-D integral over u = cos(theta)
    between the Bloch vector and the observable axis.
    """
    trace, trace_sq = obs.trace, obs.trace_square
    half_gap = math.sqrt(max(0.0, 2 * trace_sq - trace**2)) / 2  # |b| of Omega = aI + b.sigma
    a = trace / 2
    radius = math.sqrt(n2)
    u, weights = leggauss(200)
    truth = a + half_gap * radius * u
    p_top = (1 + radius * u) / 2
    estimates, minimum = [], 0.0
    for p in (p_top, 1 - p_top):
        num = float(weights @ (p * truth)) / 2
        den = float(weights @ p) / 2
        estimates.append(num / den)
        minimum += float(weights @ (p * (num / den - truth) ** 2)) / 2
    return estimates, minimum


def test_mixed_estimator_matches_brute_force_minimization():
    rng = np.random.default_rng(7)
    for n2 in (0.36, 0.6, 1.0):
        for _ in range(5):
            obs = random_observable(2, rng)
            best, _ = quadrature_bayes_estimates(obs, n2)
            for index, want in enumerate(best):
                got = estimate_optimal_mixed_qubit(sequence(obs, [index]), obs, n2)
                assert abs(got - want) < 1e-12


def test_mixed_estimator_validation():
    with pytest.raises(ValueError):
        estimate_optimal_mixed_qubit(sequence(SIGMA_Z, [0, 1]), SIGMA_Z, 0.5)
    with pytest.raises(ValueError):
        estimate_optimal_mixed_qubit(sequence(SIGMA_Z, [0]), SIGMA_Z, 1.5)
    obs3 = make_observable(np.diag([1.0, 0.0, -1.0]))
    with pytest.raises(ValueError):
        estimate_optimal_mixed_qubit(sequence(obs3, [0]), obs3, 0.5)


# --- closed-form errors ---

def test_delta_opt_headline_value():
    assert analytic_delta_opt(SIGMA_Z, 1) == 2 / 9


def test_delta_opt_identity_is_zero():
    obs = make_observable(np.eye(3))
    assert analytic_delta_opt(obs, 4) == 0.0


def test_delta_opt_d3_example():
    obs = make_observable(np.diag([3.0, 0.0, -3.0]))
    assert analytic_delta_opt(obs, 2) == pytest.approx(0.9, abs=1e-15)


def test_delta_av_headline_value():
    assert analytic_delta_av(SIGMA_Z, 1) == 2 / 3


def test_delta_ratio_is_copies_plus_dim_over_copies():
    rng = np.random.default_rng(8)
    obs = random_observable(4, rng)
    assert analytic_delta_av(obs, 2) / analytic_delta_opt(obs, 2) == pytest.approx(3.0, rel=1e-13)


def test_delta_av_conditional_eigenstate_is_zero():
    state = PureState(SIGMA_Z.eigenvectors[:, 0])
    assert abs(analytic_delta_av_conditional(state, SIGMA_Z, 3)) < 1e-14


def test_delta_av_conditional_fair_coin():
    plus = PureState(np.array([1.0, 1.0]) / np.sqrt(2))
    assert analytic_delta_av_conditional(plus, SIGMA_Z, 4) == pytest.approx(0.25, abs=1e-14)


def test_delta_av_conditional_haar_average():
    amps = sample_haar_amplitudes(2, 1_000_000, derive_stream(41, 0))
    p_top = np.abs(amps[:, 0]) ** 2
    truth = 2 * p_top - 1  # tr[rho sigma_z]
    conditional = (1.0 - truth**2) / 1  # tr[rho sigma_z^2] = 1
    assert abs(float(conditional.mean()) - 2 / 3) < 0.002
    # the scalar routine agrees with the vectorized expression
    for row in amps[:100]:
        state = PureState(row)
        want = (1.0 - expectation(state, SIGMA_Z) ** 2) / 1
        assert abs(analytic_delta_av_conditional(state, SIGMA_Z, 1) - want) < 1e-12


def test_bias_mean_deterministic_case():
    state = PureState(np.array([1.0, 0.0]))
    assert analytic_bias_mean(state, SIGMA_Z, 1) == 1 / 3


def test_bias_mean_identity_observable():
    obs = make_observable(np.eye(3))
    state = PureState(np.array([0.0, 1.0, 0.0], dtype=complex))
    assert analytic_bias_mean(state, obs, 7) == 1.0


def test_sample_average_unbiased_at_fixed_state():
    rng = np.random.default_rng(14)
    obs = random_observable(3, rng)
    amp = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    state = PureState(amp / np.linalg.norm(amp))
    copies, trials = 3, 200_000
    p = outcome_distribution(state, obs)
    draws = _draw_indices(p, copies * trials, derive_stream(44, 0).generator)
    averages = obs.eigenvalues[draws].reshape(trials, copies).mean(axis=1)
    sigma = float(averages.std(ddof=1)) / math.sqrt(trials)
    assert abs(float(averages.mean()) - expectation(state, obs)) < 3 * sigma


def test_bias_mean_matches_monte_carlo():
    rng = np.random.default_rng(9)
    obs = random_observable(3, rng)
    amp = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    state = PureState(amp / np.linalg.norm(amp))
    copies, trials = 5, 1_000_000
    p = outcome_distribution(state, obs)
    draws = _draw_indices(p, copies * trials, derive_stream(42, 0).generator)
    estimates = (obs.trace + obs.eigenvalues[draws].reshape(trials, copies).sum(axis=1)) / (
        copies + 3
    )
    sigma = float(estimates.std(ddof=1)) / math.sqrt(trials)
    assert abs(float(estimates.mean()) - analytic_bias_mean(state, obs, copies)) < 3 * sigma


def test_second_moment_values():
    assert analytic_second_moment(SIGMA_Z) == 1 / 3
    obs_id = make_observable(np.eye(5))
    assert analytic_second_moment(obs_id) == 1.0
    obs = make_observable(np.diag([1.0, 0.0]))
    assert analytic_second_moment(obs) == 1 / 3


def test_second_moment_haar_monte_carlo():
    amps = sample_haar_amplitudes(2, 1_000_000, derive_stream(43, 0))
    squared = (2 * np.abs(amps[:, 0]) ** 2 - 1) ** 2  # (tr[rho sigma_z])^2
    assert abs(float(squared.mean()) - 1 / 3) < 0.002
    quartic = np.abs(amps[:, 0]) ** 4  # |c_0|^4 under Haar: second moment of diag(1,0)
    assert abs(float(quartic.mean()) - 1 / 3) < 0.002


def test_delta_mixed_consistency_points():
    assert analytic_delta_mixed_qubit(SIGMA_Z, 1.0) == analytic_delta_opt(SIGMA_Z, 1)
    assert analytic_delta_mixed_qubit(SIGMA_Z, 0.0) == 0.0


def test_delta_mixed_matches_brute_force_minimum():
    rng = np.random.default_rng(10)
    for n2 in (0.2, 0.36, 0.6, 1.0):
        for _ in range(5):
            obs = random_observable(2, rng)
            _, minimum = quadrature_bayes_estimates(obs, n2)
            assert abs(analytic_delta_mixed_qubit(obs, n2) - minimum) < 1e-12


def test_delta_mixed_sigma_z_value():
    # (0.6/12) * (1 - 0.2) * 4
    assert analytic_delta_mixed_qubit(SIGMA_Z, 0.6) == pytest.approx(0.16, abs=1e-15)


# --- invariants ---

def test_dominance_unless_identity():
    rng = np.random.default_rng(11)
    for d in (2, 3, 4):
        for copies in (1, 2, 8):
            obs = random_observable(d, rng)
            assert analytic_delta_opt(obs, copies) < analytic_delta_av(obs, copies)
    obs_id = make_observable(np.eye(3))
    assert analytic_delta_opt(obs_id, 2) == analytic_delta_av(obs_id, 2) == 0.0


def test_shift_covariance():
    rng = np.random.default_rng(12)
    for _ in range(10):
        obs = random_observable(3, rng)
        shift = rng.standard_normal()
        shifted = make_observable(obs.matrix + shift * np.eye(3))
        out = sequence(obs, [0, 2, 1])
        out_shifted = OutcomeSequence(indices=out.indices, values=shifted.eigenvalues[out.indices])
        assert abs(estimate_optimal(out_shifted, shifted) - estimate_optimal(out, obs) - shift) < 1e-12
        assert (
            abs(estimate_sample_average(out_shifted) - estimate_sample_average(out) - shift) < 1e-12
        )
        assert abs(analytic_delta_opt(shifted, 2) - analytic_delta_opt(obs, 2)) < 1e-12
        assert abs(analytic_delta_av(shifted, 2) - analytic_delta_av(obs, 2)) < 1e-12


def test_scale_covariance():
    rng = np.random.default_rng(13)
    obs = random_observable(3, rng)
    scale = 2.5
    scaled = make_observable(scale * obs.matrix)
    out = sequence(obs, [1, 0])
    out_scaled = OutcomeSequence(indices=out.indices, values=scaled.eigenvalues[out.indices])
    assert abs(estimate_optimal(out_scaled, scaled) - scale * estimate_optimal(out, obs)) < 1e-12
    assert abs(analytic_delta_opt(scaled, 2) - scale**2 * analytic_delta_opt(obs, 2)) < 1e-11
    assert abs(analytic_delta_av(scaled, 2) - scale**2 * analytic_delta_av(obs, 2)) < 1e-11


def test_outcome_sequence_validation():
    with pytest.raises(ValueError):
        OutcomeSequence(indices=np.array([0, 1]), values=np.array([1.0]))
