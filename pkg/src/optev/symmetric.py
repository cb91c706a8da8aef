"""Exact totally-symmetric-subspace machinery on small tensor powers.

Dense constructions of the symmetrizer S_n on (C^d)^(x n), one-body
embeddings, the shrinkage operator built from them, partial traces, and
ensemble averages of tensor powers.  Instances are capped at d**n <= 4096
so every identity can be certified at machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .hermitian import Observable, _frozen, make_observable
from .sampling import RngStream, sample_haar_amplitudes

DIMENSION_GUARD = 4096
_INT64_MAX = 2**63 - 1


def symmetric_dimension(d: int, n: int) -> int:
    """Dimension of the totally symmetric subspace: C(n+d-1, d-1), exact."""
    if d < 1 or n < 0:
        raise ValueError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    value = math.comb(n + d - 1, d - 1)
    if value > _INT64_MAX:
        raise OverflowError(f"symmetric dimension C({n + d - 1},{d - 1}) exceeds 64-bit range")
    return value


def _check_guard(d: int, n: int) -> None:
    if d**n > DIMENSION_GUARD:
        raise ValueError(
            f"d**n = {d**n} exceeds the dense-construction guard {DIMENSION_GUARD}"
        )


def _check_copies(d: int, n: int) -> None:
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    _check_guard(d, n)


def _swap_indices(d: int, n: int, a: int, b: int) -> np.ndarray:
    """Basis-index permutation that swaps tensor slots a and b (0-based)."""
    idx = np.arange(d**n).reshape([d] * n)
    return np.swapaxes(idx, a, b).ravel()


def _digit_table(d: int, n: int) -> np.ndarray:
    """Row x holds the base-d digits (i_1, ..., i_n) of basis index x."""
    idx = np.arange(d**n)
    shifts = d ** np.arange(n - 1, -1, -1)
    return (idx[:, None] // shifts[None, :]) % d


@dataclass(frozen=True)
class SymmetricProjector:
    """Projector S_n onto the symmetric subspace of the n-fold tensor power."""

    local_dim: int
    copies: int
    matrix: np.ndarray
    dimension: int


def build_projector_permutation(d: int, n: int) -> SymmetricProjector:
    """S_n as the sum of all n! tensor-factor permutations divided by n!.

    The n!-scaled sum is accumulated exactly in int64 through the coset
    recursion  k! S_k = (sum over j of the (j,k) transposition) (k-1)! S_{k-1} x 1,
    which reproduces the full permutation sum entry for entry, independent
    of enumeration order, then divides once.
    """
    _check_copies(d, n)
    scaled = np.eye(d, dtype=np.int64)
    for k in range(2, n + 1):
        grown = np.kron(scaled, np.eye(d, dtype=np.int64))
        acc = grown.copy()  # the j = k (identity) coset
        for j in range(k - 1):
            acc += grown[_swap_indices(d, k, j, k - 1), :]
        scaled = acc
    matrix = scaled / math.factorial(n)
    return SymmetricProjector(
        local_dim=d, copies=n, matrix=_frozen(matrix), dimension=symmetric_dimension(d, n)
    )


def enumerate_occupations(d: int, n: int) -> list[tuple[int, ...]]:
    """All d-tuples of nonnegative counts summing to n, lexicographic order."""
    if d < 1 or n < 0:
        raise ValueError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    out: list[tuple[int, ...]] = []

    def grow(prefix: tuple[int, ...], remaining: int, slots: int) -> None:
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for count in range(remaining + 1):
            grow(prefix + (count,), remaining - count, slots - 1)

    grow((), n, d)
    return out


def occupation_basis_vector(d: int, n: int, counts) -> np.ndarray:
    """Normalized symmetric basis vector with the given occupation counts.

    The equal-amplitude sum over the multinomial(n; counts) distinct product
    states, scaled by the reciprocal square root of that multiplicity.
    """
    _check_copies(d, n)
    counts = tuple(int(c) for c in counts)
    if len(counts) != d or any(c < 0 for c in counts) or sum(counts) != n:
        raise ValueError(f"occupation counts must be {d} nonnegative integers summing to {n}, got {counts}")
    digits = _digit_table(d, n)
    occ = np.stack([(digits == v).sum(axis=1) for v in range(d)], axis=1)
    ids = np.flatnonzero((occ == np.array(counts)).all(axis=1))
    vec = np.zeros(d**n)
    vec[ids] = 1.0 / math.sqrt(ids.size)
    return vec


def build_projector_occupation(d: int, n: int) -> SymmetricProjector:
    """S_n as the sum of occupation-number basis projectors.

    Independent of the permutation-sum route: within each occupation class of
    multiplicity m the projector block is the constant matrix 1/m, and
    distinct classes do not mix.
    """
    _check_copies(d, n)
    digits = _digit_table(d, n)
    occ = np.stack([(digits == v).sum(axis=1) for v in range(d)], axis=1)
    matrix = np.zeros((d**n, d**n))
    dimension = 0
    for counts in enumerate_occupations(d, n):
        ids = np.flatnonzero((occ == np.array(counts)).all(axis=1))
        matrix[np.ix_(ids, ids)] = 1.0 / ids.size
        dimension += 1
    return SymmetricProjector(local_dim=d, copies=n, matrix=_frozen(matrix), dimension=dimension)


def embed_one_body(obs: Observable, position: int, copies: int) -> np.ndarray:
    """The observable acting on one tensor slot: 1 x ... x Omega x ... x 1.

    ``position`` is 1-based; position 1 is the leftmost Kronecker factor.
    """
    if not 1 <= position <= copies:
        raise ValueError(f"position must lie in [1, {copies}], got {position}")
    d = obs.dim
    _check_guard(d, copies)
    left = np.eye(d ** (position - 1))
    right = np.eye(d ** (copies - position))
    return np.kron(np.kron(left, obs.matrix), right)


def omega_hat(obs: Observable, copies: int) -> np.ndarray:
    """Shrinkage operator (tr Omega + sum_n Omega(n)) / (N + d).

    Diagonal in the product eigenbasis, where its eigenvalue on
    |i_1 ... i_N> is exactly the optimal estimate for those outcomes.
    """
    _check_copies(obs.dim, copies)
    total = obs.trace * np.eye(obs.dim**copies, dtype=complex)
    for position in range(1, copies + 1):
        total += embed_one_body(obs, position, copies)
    return total / (copies + obs.dim)


def omega_hat_av(obs: Observable, copies: int) -> np.ndarray:
    """Uniform one-body average (1/N) sum_n Omega(n).

    Its eigenvalue on a product eigenvector is the sample average of the
    corresponding outcomes, and tr[rho^(x N) omega_hat_av] = tr[rho Omega].
    """
    _check_copies(obs.dim, copies)
    total = embed_one_body(obs, 1, copies).astype(complex)
    for position in range(2, copies + 1):
        total += embed_one_body(obs, position, copies)
    return total / copies


def partial_trace_last(matrix: np.ndarray, d: int, copies: int) -> np.ndarray:
    """Contract the last tensor factor of a d**copies-dimensional operator."""
    if copies < 1 or d < 1:
        raise ValueError(f"need d >= 1 and copies >= 1, got d={d}, copies={copies}")
    full = d**copies
    m = np.asarray(matrix)
    if m.shape != (full, full):
        raise ValueError(f"matrix shape {m.shape} does not match (d**copies, d**copies) = ({full}, {full})")
    rest = d ** (copies - 1)
    return np.einsum("ikjk->ij", m.reshape(rest, d, rest, d))


def _tensor_power_rows(amplitudes: np.ndarray, n: int) -> np.ndarray:
    """Row-wise n-fold Kronecker power: (m, d) -> (m, d**n)."""
    rows = amplitudes
    for _ in range(n - 1):
        rows = (rows[:, :, None] * amplitudes[:, None, :]).reshape(amplitudes.shape[0], -1)
    return rows


def haar_average_tensor_power(
    d: int, n: int, trials: int, stream: RngStream, chunk: int = 65536
) -> np.ndarray:
    """Empirical mean of rho^(x n) over Haar-uniform pure states.

    Converges to S_n / d_n; the sampler consumes the stream identically to
    ``trials`` successive single-state draws.
    """
    _check_copies(d, n)
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    size = d**n
    acc = np.zeros((size, size), dtype=complex)
    remaining = trials
    while remaining > 0:
        m = min(chunk, remaining)
        amps = sample_haar_amplitudes(d, m, stream)
        rows = _tensor_power_rows(amps, n)
        acc += rows.T @ rows.conj()
        remaining -= m
    return acc / trials


@dataclass(frozen=True)
class LemmaReport:
    """Deviations from both directions of the symmetric-support lemma."""

    dim: int
    copies: int
    trials: int
    forward_max_deviation: float
    forward_tolerance: float
    converse_max_deviation: float
    converse_tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.forward_max_deviation <= self.forward_tolerance
            and self.converse_max_deviation <= self.converse_tolerance
        )


def check_unbiased_lemma(d: int, copies: int, trials: int, stream: RngStream) -> LemmaReport:
    """Numerical check of: tr[A rho^(x N)] = 0 for all pure rho iff S A S = 0.

    Forward: for a random Hermitian B, A = B - S B S satisfies S A S = 0, so
    tr[A rho^(x N)] must vanish on every sampled pure state.  Converse
    instance: the product-eigenprojector POVM weighted by sample averages
    reproduces the one-body average operator inside the symmetric subspace.
    """
    _check_copies(d, copies)
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    g = stream.generator
    size = d**copies
    s = build_projector_permutation(d, copies).matrix

    raw = g.standard_normal((size, size)) + 1j * g.standard_normal((size, size))
    b = (raw + raw.conj().T) / 2.0
    a = b - s @ b @ s
    amps = sample_haar_amplitudes(d, trials, stream)
    rows = _tensor_power_rows(amps, copies)
    values = np.einsum("bi,ij,bj->b", rows.conj(), a, rows)
    forward = float(np.abs(values).max())

    # sample-average POVM: sum_a omega_a E_a with E_a the product
    # eigenprojectors of a random observable and omega_a the sample averages
    raw2 = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    obs = make_observable((raw2 + raw2.conj().T) / 2.0)
    digits = _digit_table(d, copies)
    averaged = obs.eigenvalues[digits].mean(axis=1)
    vkron = reduce(np.kron, [obs.eigenvectors] * copies)  # columns are product eigenvectors
    weighted = (vkron * averaged) @ vkron.conj().T
    deviation_op = s @ (weighted - omega_hat_av(obs, copies)) @ s
    converse = float(np.abs(deviation_op).max())

    return LemmaReport(
        dim=d,
        copies=copies,
        trials=trials,
        forward_max_deviation=forward,
        forward_tolerance=1e-10,
        converse_max_deviation=converse,
        converse_tolerance=1e-12,
    )
