"""Measurement simulation, the two estimators, and their closed-form errors.

The estimation target is t = tr[rho Omega].  Measuring Omega independently
on each of N copies yields eigenvalue indices (i_1, ..., i_N); the sample
average is the mean of the observed eigenvalues, while the optimal estimator
averages the N observed values together with all d eigenvalues of the
observable, i.e. (tr Omega + sum_n Omega_{i_n}) / (N + d).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .hermitian import Observable, PureState, _frozen, expectation, outcome_distribution
from .sampling import RngStream


class EstimatorKind(str, enum.Enum):
    SAMPLE_AVERAGE = "sample-average"
    OPTIMAL_PURE = "optimal-pure"
    OPTIMAL_MIXED_QUBIT = "optimal-mixed-qubit"


@dataclass(frozen=True)
class OutcomeSequence:
    """Eigenvalue indices and values from N successive projective measurements."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        val = np.asarray(self.values, dtype=float)
        if idx.ndim != 1 or val.shape != idx.shape:
            raise ValueError(
                f"indices and values must be equal-length vectors, got {idx.shape} and {val.shape}"
            )
        object.__setattr__(self, "indices", _frozen(idx))
        object.__setattr__(self, "values", _frozen(val))

    def __len__(self) -> int:
        return self.indices.size


def _draw_indices(probabilities: np.ndarray, count: int, generator: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw of eigenbasis indices; renormalizes away float drift."""
    cdf = np.cumsum(probabilities)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, generator.random(count), side="right")


def simulate_measurements(state: PureState, obs: Observable, copies: int, stream: RngStream) -> OutcomeSequence:
    """N independent projective measurements of the observable's eigenbasis."""
    if copies < 1:
        raise ValueError(f"need at least one measurement, got copies={copies}")
    p = outcome_distribution(state, obs)
    indices = _draw_indices(p, copies, stream.generator)
    return OutcomeSequence(indices=indices, values=obs.eigenvalues[indices])


def _sample_average_from_sum(value_sum: float, count: int) -> float:
    return value_sum / count


def _optimal_from_sum(trace: float, value_sum: float, count: int, dim: int) -> float:
    return (trace + value_sum) / (count + dim)


def _mixed_qubit_from_value(trace: float, value: float, n2: float) -> float:
    # (3 - n2)/6 keeps the n2 = 0 case exactly equal to trace/2
    return (3.0 - n2) / 6.0 * trace + n2 / 3.0 * value


def _check_nonempty(outcomes: OutcomeSequence) -> None:
    if len(outcomes) == 0:
        raise ValueError("empty outcome sequence")


def _check_copies(copies: int) -> None:
    if copies < 1:
        raise ValueError(f"need copies >= 1, got {copies}")


def _check_n2(n2: float) -> None:
    if not 0.0 <= n2 <= 1.0:
        raise ValueError(f"second moment n2 must lie in [0, 1], got {n2!r}")


def estimate_sample_average(outcomes: OutcomeSequence) -> float:
    """Arithmetic mean of the observed eigenvalues; unbiased for every state."""
    _check_nonempty(outcomes)
    return float(_sample_average_from_sum(float(outcomes.values.sum()), len(outcomes)))


def estimate_optimal(outcomes: OutcomeSequence, obs: Observable) -> float:
    """Mean of the N observed values and the d eigenvalues of the observable.

    The d extra data points add up to tr Omega, so the estimate is
    (tr Omega + sum_n Omega_{i_n}) / (N + d).  Minimizes the squared error
    averaged over the hypersphere-uniform pure-state ensemble; biased at
    finite N.
    """
    _check_nonempty(outcomes)
    return float(_optimal_from_sum(obs.trace, float(outcomes.values.sum()), len(outcomes), obs.dim))


def estimate_optimal_mixed_qubit(outcomes: OutcomeSequence, obs: Observable, n2: float) -> float:
    """Optimal single-copy qubit estimate for an isotropic Bloch ensemble.

    Returns ((3 - n2)/2 * tr Omega + n2 * Omega_{i_1}) / 3 where n2 is the
    ensemble's Bloch-length second moment.  At n2 = 1 this reduces to the
    pure-state optimal estimate; at n2 = 0 the observed datum is discarded
    and the output is exactly tr Omega / 2.
    """
    if obs.dim != 2:
        raise ValueError(f"mixed-qubit estimator requires d=2, got d={obs.dim}")
    if len(outcomes) != 1:
        raise ValueError(f"mixed-qubit estimator requires exactly one outcome, got {len(outcomes)}")
    _check_n2(n2)
    return float(_mixed_qubit_from_value(obs.trace, float(outcomes.values[0]), n2))


def analytic_delta_opt(obs: Observable, copies: int) -> float:
    """Minimal ensemble-averaged squared error of the optimal estimator.

    (d tr Omega^2 - (tr Omega)^2) / (d (d+1) (N+d)); zero iff the observable
    is a multiple of the identity.
    """
    _check_copies(copies)
    d = obs.dim
    return (d * obs.trace_square - obs.trace**2) / (d * (d + 1) * (copies + d))


def analytic_delta_av(obs: Observable, copies: int) -> float:
    """Ensemble-averaged squared error of the sample average.

    (d tr Omega^2 - (tr Omega)^2) / (d (d+1) N): the optimal error scaled by
    (N+d)/N.
    """
    _check_copies(copies)
    d = obs.dim
    return (d * obs.trace_square - obs.trace**2) / (d * (d + 1) * copies)


def analytic_delta_av_conditional(state: PureState, obs: Observable, copies: int) -> float:
    """Squared error of the sample average at fixed state: its variance / N."""
    _check_copies(copies)
    p = outcome_distribution(state, obs)
    w = obs.eigenvalues
    mean = float(p @ w)
    second = float(p @ (w * w))
    return (second - mean**2) / copies


def analytic_bias_mean(state: PureState, obs: Observable, copies: int) -> float:
    """Exact conditional mean of the optimal estimate at fixed state.

    (tr Omega + N tr[rho Omega]) / (N + d); approaches tr[rho Omega] only as
    N grows.
    """
    _check_copies(copies)
    return (obs.trace + copies * expectation(state, obs)) / (copies + obs.dim)


def analytic_second_moment(obs: Observable) -> float:
    """Hypersphere-ensemble second moment of tr[rho Omega].

    ((tr Omega)^2 + tr Omega^2) / (d (d+1)).
    """
    d = obs.dim
    return (obs.trace**2 + obs.trace_square) / (d * (d + 1))


def analytic_delta_mixed_qubit(obs: Observable, n2: float) -> float:
    """Minimal single-copy squared error for the isotropic qubit ensemble.

    (n2/12) (1 - n2/3) (2 tr Omega^2 - (tr Omega)^2) for a Bloch ensemble
    with second moment n2.  Agrees with the pure-state optimum at n2 = 1 and
    vanishes at n2 = 0, where the expectation value is known exactly.
    """
    if obs.dim != 2:
        raise ValueError(f"mixed-qubit error formula requires d=2, got d={obs.dim}")
    _check_n2(n2)
    # grouped as n2 (3 - n2) / 36 so the n2 = 1 value equals the one-copy
    # pure optimum to the last bit
    return n2 * (3.0 - n2) / 36.0 * (2.0 * obs.trace_square - obs.trace**2)
