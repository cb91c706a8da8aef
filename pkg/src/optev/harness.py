"""Seeded Monte Carlo experiment runner with CSV/JSON emission.

Each trial k draws all of its randomness from the stream keyed by
(master_seed, k), accumulates into a per-trial slot, and results are
reduced sequentially afterwards, so output is byte-identical for any
worker count.  Trials 0..M-1 sample the ensemble; trials M..2M-1 drive
the fixed-probe bias measurement.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .estimators import (
    EstimatorKind,
    _draw_indices,
    _mixed_qubit_from_value,
    _optimal_from_sum,
    _sample_average_from_sum,
    analytic_bias_mean,
    analytic_delta_av,
    analytic_delta_mixed_qubit,
    analytic_delta_opt,
)
from .hermitian import Observable, PureState, expectation, make_observable, observable_from_json
from .sampling import RadialLaw, StreamPool, _bloch_vector, _haar_rows

HAAR_ENSEMBLE = "haar-pure"

CSV_COLUMNS = (
    "d",
    "N",
    "M",
    "seed",
    "estimator",
    "ensemble",
    "n2",
    "empirical_mse",
    "standard_error",
    "analytic_mse",
    "empirical_bias",
    "analytic_bias",
    "wall_time_s",
)


class ConfigError(ValueError):
    """Invalid experiment configuration or unreadable input file."""


def load_observable(source, dim: int | None = None) -> Observable:
    """Resolve a builtin observable name or parse an observable JSON file.

    Builtins: ``pauli-z``, ``identity`` (needs ``dim``), ``diag(a,b,...)``.
    """
    text = str(source)
    if text == "pauli-z":
        return make_observable([[1.0, 0.0], [0.0, -1.0]])
    if text == "identity":
        if dim is None:
            raise ConfigError("builtin 'identity' needs an explicit dimension")
        return make_observable(np.eye(dim))
    if text.startswith("diag(") and text.endswith(")"):
        body = text[len("diag(") : -1]
        try:
            values = [float(token) for token in body.split(",")]
        except ValueError as exc:
            raise ConfigError(f"cannot parse diagonal observable {text!r}: {exc}") from exc
        return make_observable(np.diag(values))
    path = Path(text)
    if not path.exists():
        raise ConfigError(f"unknown builtin observable or missing file: {text!r}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{text}: JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return observable_from_json(payload)
    except ValueError as exc:
        raise ConfigError(f"{text}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one Monte Carlo experiment."""

    dim: int = 2
    copies: int = 1
    trials: int = 100_000
    master_seed: int = 0
    estimator: EstimatorKind = EstimatorKind.OPTIMAL_PURE
    ensemble: "str | RadialLaw" = HAAR_ENSEMBLE
    observable_source: str = "pauli-z"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "estimator", EstimatorKind(self.estimator))
        if self.dim < 2:
            raise ConfigError(f"dim must be >= 2, got {self.dim}")
        if self.copies < 1:
            raise ConfigError(f"copies must be >= 1, got {self.copies}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.is_bloch:
            if not isinstance(self.ensemble, RadialLaw):
                raise ConfigError(f"ensemble must be {HAAR_ENSEMBLE!r} or a RadialLaw, got {self.ensemble!r}")
            if self.dim != 2:
                raise ConfigError("the Bloch ensemble is qubit-only (dim must be 2)")
        if self.estimator is EstimatorKind.OPTIMAL_MIXED_QUBIT:
            if not self.is_bloch:
                raise ConfigError("the mixed-qubit estimator needs a Bloch ensemble to define n2")
            if self.dim != 2 or self.copies != 1:
                raise ConfigError("the mixed-qubit estimator requires dim=2 and copies=1")

    @property
    def is_bloch(self) -> bool:
        return not (isinstance(self.ensemble, str) and self.ensemble == HAAR_ENSEMBLE)

    @property
    def law(self) -> RadialLaw | None:
        return self.ensemble if self.is_bloch else None

    @property
    def n2(self) -> float | None:
        return self.ensemble.second_moment() if self.is_bloch else None

    @property
    def ensemble_label(self) -> str:
        return f"bloch({self.ensemble.label()})" if self.is_bloch else HAAR_ENSEMBLE

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "copies": self.copies,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "estimator": self.estimator.value,
            "ensemble": {"bloch": self.ensemble.to_dict()} if self.is_bloch else HAAR_ENSEMBLE,
            "observable_source": self.observable_source,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        if not isinstance(payload, dict):
            raise ConfigError(f"config must be a JSON object, got {type(payload).__name__}")
        unknown = payload.keys() - {
            "dim",
            "copies",
            "trials",
            "master_seed",
            "estimator",
            "ensemble",
            "observable_source",
            "workers",
        }
        if unknown:
            raise ConfigError(f"config has unknown keys: {sorted(unknown)}")
        kwargs = dict(payload)
        ensemble = kwargs.get("ensemble", HAAR_ENSEMBLE)
        if isinstance(ensemble, dict):
            if set(ensemble.keys()) != {"bloch"}:
                raise ConfigError(f"ensemble object must be {{'bloch': law}}, got {ensemble!r}")
            try:
                kwargs["ensemble"] = RadialLaw.from_dict(ensemble["bloch"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        elif ensemble != HAAR_ENSEMBLE:
            raise ConfigError(f"ensemble must be {HAAR_ENSEMBLE!r} or a bloch law object, got {ensemble!r}")
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return ExperimentConfig.from_dict(payload)


@dataclass(frozen=True)
class ResultRow:
    """One experiment's empirical results next to their closed forms."""

    config: ExperimentConfig
    empirical_mse: float
    analytic_mse: float | None
    empirical_bias_at_probe: float
    analytic_bias_at_probe: float
    standard_error: float
    wall_time: float


def _payload(config: ExperimentConfig, obs: Observable) -> dict:
    law = config.law
    return {
        "dim": config.dim,
        "copies": config.copies,
        "trials": config.trials,
        "master_seed": config.master_seed,
        "estimator": config.estimator.value,
        "eigenvalues": np.asarray(obs.eigenvalues),
        "eigenvectors": np.asarray(obs.eigenvectors),
        "matrix": np.asarray(obs.matrix),
        "trace": obs.trace,
        "law": None if law is None else law.to_dict(),
        "n2": config.n2,
    }


def _estimate_from_values(kind: str, trace: float, values: np.ndarray, count: int, dim: int, n2) -> float:
    if kind == EstimatorKind.SAMPLE_AVERAGE.value:
        return _sample_average_from_sum(float(values.sum()), count)
    if kind == EstimatorKind.OPTIMAL_PURE.value:
        return _optimal_from_sum(trace, float(values.sum()), count, dim)
    return _mixed_qubit_from_value(trace, float(values[0]), n2)


def _ensemble_chunk(payload: dict, start: int, stop: int) -> np.ndarray:
    d = payload["dim"]
    n = payload["copies"]
    w = payload["eigenvalues"]
    vh = payload["eigenvectors"].conj().T
    trace = payload["trace"]
    kind = payload["estimator"]
    n2 = payload["n2"]
    law = None if payload["law"] is None else RadialLaw.from_dict(payload["law"])
    pool = StreamPool(payload["master_seed"])
    errors = np.empty(stop - start)

    if law is None:
        for k in range(start, stop):
            generator = pool.generator(k)
            amplitudes = _haar_rows(d, 1, generator)[0]
            overlaps = vh @ amplitudes
            p = overlaps.real**2 + overlaps.imag**2
            truth = float(p @ w)
            indices = _draw_indices(p, n, generator)
            estimate = _estimate_from_values(kind, trace, w[indices], n, d, n2)
            errors[k - start] = (estimate - truth) ** 2
    else:
        # qubit Bloch ensemble: p_i = (1 + n.m_i)/2 with m_i the Bloch
        # vector of eigenvector i, and m_1 = -m_0; t = (tr + n.tau)/2
        top = payload["eigenvectors"][:, 0]
        m_top = np.array(
            [
                2.0 * (top[0].conjugate() * top[1]).real,
                2.0 * (top[0].conjugate() * top[1]).imag,
                float(abs(top[0]) ** 2 - abs(top[1]) ** 2),
            ]
        )
        matrix = payload["matrix"]
        tau = np.array(
            [
                2.0 * matrix[0, 1].real,
                -2.0 * matrix[0, 1].imag,
                (matrix[0, 0] - matrix[1, 1]).real,
            ]
        )
        for k in range(start, stop):
            generator = pool.generator(k)
            bloch = _bloch_vector(law, generator)
            truth = 0.5 * (trace + float(bloch @ tau))
            p_top = 0.5 * (1.0 + float(bloch @ m_top))
            p = np.array([p_top, 1.0 - p_top])
            indices = _draw_indices(p, n, generator)
            estimate = _estimate_from_values(kind, trace, w[indices], n, d, n2)
            errors[k - start] = (estimate - truth) ** 2
    return errors


def _probe_chunk(payload: dict, start: int, stop: int) -> np.ndarray:
    d = payload["dim"]
    n = payload["copies"]
    w = payload["eigenvalues"]
    vh = payload["eigenvectors"].conj().T
    trace = payload["trace"]
    kind = payload["estimator"]
    n2 = payload["n2"]
    trials = payload["trials"]
    pool = StreamPool(payload["master_seed"])

    probe = payload["eigenvectors"][:, 0]
    overlaps = vh @ probe
    p = overlaps.real**2 + overlaps.imag**2
    cdf = np.cumsum(p)
    cdf /= cdf[-1]

    estimates = np.empty(stop - start)
    for k in range(start, stop):
        generator = pool.generator(trials + k)
        indices = np.searchsorted(cdf, generator.random(n), side="right")
        estimates[k - start] = _estimate_from_values(kind, trace, w[indices], n, d, n2)
    return estimates


def _collect(chunk_fn, payload: dict, total: int, workers: int, pool=None) -> np.ndarray:
    if workers <= 1 or total < 2 * workers:
        return chunk_fn(payload, 0, total)
    base, extra = divmod(total, workers)
    bounds = [0]
    for i in range(workers):
        bounds.append(bounds[-1] + base + (1 if i < extra else 0))
    jobs = [(payload, bounds[i], bounds[i + 1]) for i in range(workers)]
    if pool is not None:
        parts = pool.starmap(chunk_fn, jobs)
    else:
        with get_context("spawn").Pool(workers) as fresh_pool:
            parts = fresh_pool.starmap(chunk_fn, jobs)
    return np.concatenate(parts)


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    m = values.size
    mean = math.fsum(values) / m
    if m < 2:
        return mean, 0.0
    centered = values - mean
    variance = math.fsum(centered * centered) / (m - 1)
    return mean, math.sqrt(variance / m)


def _analytic_mse(config: ExperimentConfig, obs: Observable) -> float | None:
    if not config.is_bloch:
        if config.estimator is EstimatorKind.OPTIMAL_PURE:
            return analytic_delta_opt(obs, config.copies)
        if config.estimator is EstimatorKind.SAMPLE_AVERAGE:
            return analytic_delta_av(obs, config.copies)
        return None
    if config.estimator is EstimatorKind.OPTIMAL_MIXED_QUBIT:
        return analytic_delta_mixed_qubit(obs, config.n2)
    return None


def _analytic_probe_mean(config: ExperimentConfig, obs: Observable, probe: PureState, truth: float) -> float:
    if config.estimator is EstimatorKind.OPTIMAL_PURE:
        return analytic_bias_mean(probe, obs, config.copies)
    if config.estimator is EstimatorKind.SAMPLE_AVERAGE:
        return truth
    return _mixed_qubit_from_value(obs.trace, truth, config.n2)


def run_experiment(config: ExperimentConfig, observable: Observable | None = None) -> ResultRow:
    """Run one seeded experiment: ensemble MSE pass plus fixed-probe bias pass."""
    started = time.perf_counter()
    obs = observable if observable is not None else load_observable(config.observable_source, dim=config.dim)
    if obs.dim != config.dim:
        raise ConfigError(f"observable has d={obs.dim} but config says dim={config.dim}")

    payload = _payload(config, obs)
    if config.workers > 1 and config.trials >= 2 * config.workers:
        with get_context("spawn").Pool(config.workers) as pool:
            squared_errors = _collect(_ensemble_chunk, payload, config.trials, config.workers, pool)
            probe_estimates = _collect(_probe_chunk, payload, config.trials, config.workers, pool)
    else:
        squared_errors = _collect(_ensemble_chunk, payload, config.trials, 1)
        probe_estimates = _collect(_probe_chunk, payload, config.trials, 1)

    empirical_mse, standard_error = _mean_and_se(squared_errors)
    probe_mean, _ = _mean_and_se(probe_estimates)

    probe = PureState(obs.eigenvectors[:, 0])
    truth = expectation(probe, obs)
    return ResultRow(
        config=config,
        empirical_mse=empirical_mse,
        analytic_mse=_analytic_mse(config, obs),
        empirical_bias_at_probe=probe_mean - truth,
        analytic_bias_at_probe=_analytic_probe_mean(config, obs, probe, truth) - truth,
        standard_error=standard_error,
        wall_time=time.perf_counter() - started,
    )


def run_sweep(
    base: ExperimentConfig, copies_values, dim_values, observable: Observable | None = None
) -> list[ResultRow]:
    """Both pure-ensemble estimators on every (dim, copies) cell.

    Rows come out ordered by dim, then copies, with the optimal estimator
    before the sample average; every cell reuses the base master seed.
    """
    rows = []
    for d in sorted(set(int(v) for v in dim_values)):
        obs = observable if observable is not None else load_observable(base.observable_source, dim=d)
        for n in sorted(set(int(v) for v in copies_values)):
            for kind in (EstimatorKind.OPTIMAL_PURE, EstimatorKind.SAMPLE_AVERAGE):
                config = replace(base, dim=d, copies=n, estimator=kind, ensemble=HAAR_ENSEMBLE)
                rows.append(run_experiment(config, observable=obs))
    return rows


def _format_cell(value) -> str:
    if value is None:
        return ""
    return str(value)


def rows_to_csv(rows: list[ResultRow], include_timing: bool = False) -> str:
    """Fixed-column CSV; wall time is left blank unless explicitly requested
    so equal-seed runs are byte-identical."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        config = row.config
        writer.writerow(
            [
                config.dim,
                config.copies,
                config.trials,
                config.master_seed,
                config.estimator.value,
                config.ensemble_label,
                _format_cell(config.n2),
                _format_cell(row.empirical_mse),
                _format_cell(row.standard_error),
                _format_cell(row.analytic_mse),
                _format_cell(row.empirical_bias_at_probe),
                _format_cell(row.analytic_bias_at_probe),
                _format_cell(row.wall_time if include_timing else None),
            ]
        )
    return buffer.getvalue()


def write_csv(rows: list[ResultRow], path, include_timing: bool = False) -> None:
    Path(path).write_text(rows_to_csv(rows, include_timing=include_timing))
