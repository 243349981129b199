"""Finite-size Monte Carlo oracle.

Samples channel and symbol realizations, evaluates the exact finite-size
mutual informations by log-determinants, and estimates expectations,
resolvent traces and eigenvalue ECDFs.  Every draw is a pure function of
(scenario seed, trial index), so trials can be fanned out to workers and
reduced in any order without changing the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import Beamformer, NoiseConfig, ScenarioStats, SystemDims, WeichselbergerStats

_CHANNEL_STREAM = 0
_SYMBOL_STREAM = 1


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")


def _trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), stream]))


def _draw_weichselberger(s: WeichselbergerStats, n_t: int, rng: np.random.Generator) -> np.ndarray:
    shape = s.mean.shape
    p = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0 * n_t)
    return s.mean + s.left_unitary @ (s.variance_profile * p) @ s.right_unitary.conj().T


def sample_channels(stats: ScenarioStats, trial: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """One realization (H_c, [G_1, ..., G_L]), deterministic in (stats.seed, trial)."""
    rng = _trial_rng(stats.seed, trial, _CHANNEL_STREAM)
    h_c = _draw_weichselberger(stats.comm, stats.dims.n_t, rng)
    g_list = [_draw_weichselberger(s, stats.dims.n_t, rng) for s in stats.sensing]
    return h_c, g_list


def sample_symbols(dims: SystemDims, trial: int, seed: int = 0) -> np.ndarray:
    """Symbol block S (m, n_s) with i.i.d. CN(0, 1/n_s) entries, so E[SS'] = I_m."""
    rng = _trial_rng(seed, trial, _SYMBOL_STREAM)
    shape = (dims.m, dims.n_s)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(
        2.0 * dims.n_s
    )


def _logdet_i_plus_psd(b: np.ndarray, sigma2: float) -> float:
    """log det(I + B/sigma2) for Hermitian PSD B, via eigenvalues."""
    evals = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
    vals = np.log1p(np.clip(evals, 0.0, None) / sigma2)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite logdet: invalid inputs")
    return float(vals.sum())


def finite_mi_sensing(
    g_list: Iterable[np.ndarray], s: np.ndarray, w_bf: Beamformer, sigma_s2: float
) -> float:
    """Exact sensing MI logdet(I + Ghat S S' Ghat'/sigma2) in nats, Ghat stacking G_l W."""
    if sigma_s2 <= 0.0:
        raise ValueError("sigma_s2 must be positive")
    g_hat = np.vstack([g @ w_bf.w for g in g_list])
    gs = g_hat @ s
    return _logdet_i_plus_psd(gs @ gs.conj().T, sigma_s2)


def finite_mi_comm(h_c: np.ndarray, w_bf: Beamformer, sigma_c2: float) -> float:
    """Exact communication MI logdet(I + H W W' H'/sigma2) in nats."""
    if sigma_c2 <= 0.0:
        raise ValueError("sigma_c2 must be positive")
    hw = h_c @ w_bf.w
    return _logdet_i_plus_psd(hw @ hw.conj().T, sigma_c2)


def _sensing_matrix(stats: ScenarioStats, w_bf: Beamformer, trial: int) -> np.ndarray:
    _, g_list = sample_channels(stats, trial)
    s = sample_symbols(stats.dims, trial, seed=stats.seed)
    gs = np.vstack([g @ w_bf.w for g in g_list]) @ s
    return gs @ gs.conj().T


def _comm_matrix(stats: ScenarioStats, w_bf: Beamformer, trial: int) -> np.ndarray:
    h_c, _ = sample_channels(stats, trial)
    hw = h_c @ w_bf.w
    return hw @ hw.conj().T


def _resolvent_trace(b: np.ndarray, w: float) -> float:
    evals = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
    return float(np.mean(1.0 / (w - evals)))


_QUANTITIES = ("mi_s", "mi_c", "resolvent_s", "resolvent_c")


def _trial_value(
    stats: ScenarioStats, w_bf: Beamformer, noise: NoiseConfig, quantity: str, trial: int
) -> float:
    if quantity == "mi_s":
        _, g_list = sample_channels(stats, trial)
        s = sample_symbols(stats.dims, trial, seed=stats.seed)
        return finite_mi_sensing(g_list, s, w_bf, noise.sigma_s2)
    if quantity == "mi_c":
        h_c, _ = sample_channels(stats, trial)
        return finite_mi_comm(h_c, w_bf, noise.sigma_c2)
    if quantity == "resolvent_s":
        return _resolvent_trace(_sensing_matrix(stats, w_bf, trial), -noise.sigma_s2)
    if quantity == "resolvent_c":
        return _resolvent_trace(_comm_matrix(stats, w_bf, trial), -noise.sigma_c2)
    raise ValueError(f"unknown quantity {quantity!r}, expected one of {_QUANTITIES}")


def _reduce(values: np.ndarray) -> McEstimate:
    n = len(values)
    mean = float(np.mean(values))
    std_error = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean, std_error, n)


def estimate(
    stats: ScenarioStats,
    w_bf: Beamformer,
    noise: NoiseConfig,
    quantity: str,
    trials: int,
    workers: int = 1,
    dump_path: str | None = None,
) -> McEstimate:
    """Sample mean and standard error of one finite-size quantity.

    quantity is one of mi_s, mi_c (MIs in nats at the branch noise power) or
    resolvent_s, resolvent_c (normalized resolvent traces at w = -sigma2).
    Results are independent of the worker count.  With dump_path set, the
    per-trial values are written as `trial,value` CSV rows.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    fn = lambda t: _trial_value(stats, w_bf, noise, quantity, t)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.fromiter(pool.map(fn, range(trials)), dtype=float, count=trials)
    else:
        values = np.fromiter(map(fn, range(trials)), dtype=float, count=trials)
    if dump_path is not None:
        with open(dump_path, "w", encoding="utf-8") as fh:
            fh.write("trial,value\n")
            for t, v in enumerate(values):
                fh.write(f"{t},{v:.12g}\n")
    return _reduce(values)


def mi_curves(
    stats: ScenarioStats,
    w_bf: Beamformer,
    noise_grid: list[NoiseConfig],
    trials: int,
    workers: int = 1,
) -> tuple[list[McEstimate], list[McEstimate]]:
    """MC sensing and communication MI over an SNR grid, reusing realizations.

    Draws each trial once, keeps the eigenvalues of both Gram matrices, and
    evaluates every noise power from them; identical trial streams to
    `estimate`, so the means agree exactly with per-SNR calls.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")

    def eigs(trial: int) -> tuple[np.ndarray, np.ndarray]:
        b_s = _sensing_matrix(stats, w_bf, trial)
        b_c = _comm_matrix(stats, w_bf, trial)
        return (
            np.clip(np.linalg.eigvalsh(0.5 * (b_s + b_s.conj().T)), 0.0, None),
            np.clip(np.linalg.eigvalsh(0.5 * (b_c + b_c.conj().T)), 0.0, None),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pooled = list(pool.map(eigs, range(trials)))
    else:
        pooled = [eigs(t) for t in range(trials)]

    sensing, comm = [], []
    for noise in noise_grid:
        vals_s = np.array([np.log1p(es / noise.sigma_s2).sum() for es, _ in pooled])
        vals_c = np.array([np.log1p(ec / noise.sigma_c2).sum() for _, ec in pooled])
        sensing.append(_reduce(vals_s))
        comm.append(_reduce(vals_c))
    return sensing, comm


class EigenEcdf:
    """Pooled eigenvalue sample with a right-continuous ECDF evaluator."""

    def __init__(self, eigenvalues: np.ndarray):
        self.eigenvalues = np.sort(np.asarray(eigenvalues, dtype=float))

    def __call__(self, x) -> np.ndarray | float:
        frac = np.searchsorted(self.eigenvalues, np.asarray(x, dtype=float), side="right")
        out = frac / len(self.eigenvalues)
        return float(out) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def eigen_ecdf(
    stats: ScenarioStats, w_bf: Beamformer, noise: NoiseConfig, branch: str, trials: int
) -> EigenEcdf:
    """ECDF of the eigenvalues of the sensing or comm Gram matrix, pooled over trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if branch == "sensing":
        matrix = lambda t: _sensing_matrix(stats, w_bf, t)
    elif branch == "comm":
        matrix = lambda t: _comm_matrix(stats, w_bf, t)
    else:
        raise ValueError("branch must be 'sensing' or 'comm'")
    chunks = []
    for t in range(trials):
        b = matrix(t)
        chunks.append(np.linalg.eigvalsh(0.5 * (b + b.conj().T)))
    return EigenEcdf(np.concatenate(chunks))
