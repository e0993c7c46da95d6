"""Path generation for the bridge SDE dX = -alpha(t) X dt + dW, X_0 = 0.

Two schemes: plain Euler (used by the preset experiments; retains the
driving Brownian increments for pathwise local-time identities) and an exact
Gaussian-transition scheme that is unbiased at any step size and therefore
safe for stiff drifts.

Randomness is drawn from counter-based Philox streams keyed by
(seed, path_index), with step k consuming the k-th draw of the stream, so a
sample is a pure function of (seed, path_index, step) and results never
depend on execution order or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import drift as drift_mod
from .errors import DomainError

_MASK64 = (1 << 64) - 1


@dataclass
class SamplePath:
    """One trajectory on a uniform grid, with its generation metadata.

    brownian_increments holds the Delta-W per step for the Euler scheme and
    is None for the exact scheme, which does not expose the driving noise.
    stability_warning is set when h * alpha(t) exceeded 1 somewhere on the
    grid (plain Euler degrades there).
    """

    times: np.ndarray
    values: np.ndarray
    brownian_increments: np.ndarray | None
    scheme: str
    seed: int
    path_index: int
    stability_warning: bool = False

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise DomainError("times and values must have equal length")
        if self.brownian_increments is not None and len(self.brownian_increments) != len(self.times) - 1:
            raise DomainError("need one Brownian increment per step")

    @property
    def h(self):
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self):
        return float(self.times[-1])


@dataclass(frozen=True)
class DecayStats:
    """Monte Carlo |X_T| and X_T^2 summaries across a ladder of horizons."""

    horizons: np.ndarray
    mean_abs: np.ndarray
    mean_sq: np.ndarray
    n_paths: int
    std_err_sq: np.ndarray


def _grid(T, h):
    if T <= 0 or h <= 0 or h > T:
        raise DomainError(f"need 0 < h <= T, got h={h}, T={T}")
    n = int(math.ceil(T / h - 1e-9))
    return np.arange(n + 1) * float(h)


def _normals(seed, path_index, n):
    key = np.array([seed & _MASK64, path_index & _MASK64], dtype=np.uint64)
    return Generator(Philox(key=key)).standard_normal(n)


def _noise_block(seed, path_indices, n, xi=None):
    if xi is not None:
        block = np.broadcast_to(np.asarray(xi, dtype=float), (len(path_indices), n))
        return np.array(block)
    return np.stack([_normals(seed, p, n) for p in path_indices])


def _euler_block(spec, times, seed, path_indices, xi=None):
    """Euler trajectories for several paths at once; returns (values, dW, warn).

    The update is evaluated exactly as x - (alpha * x) * h + dW so that a
    single-path run, a batched run and a scalar re-derivation are
    bit-identical.
    """
    h = float(times[1] - times[0])
    n = len(times) - 1
    alpha = np.asarray(drift_mod.eval_alpha(spec, times[:-1]), dtype=float)
    warn = bool(np.any(alpha * h > 1.0))
    dw = math.sqrt(h) * _noise_block(seed, path_indices, n, xi)
    values = np.zeros((len(path_indices), n + 1))
    for k in range(n):
        x = values[:, k]
        values[:, k + 1] = (x - (alpha[k] * x) * h) + dw[:, k]
    return values, dw, warn


def exact_transition_table(spec, times):
    """Per-step decay factors and noise standard deviations of the true transition.

    X_{t_{k+1}} = exp(-(A(t_{k+1}) - A(t_k))) X_{t_k} + N(0, Var(X_{t_{k+1}} | X_{t_k})).
    """
    a_vals = drift_mod.eval_antiderivative(spec, np.asarray(times, dtype=float))
    decays = np.exp(-np.diff(a_vals))
    stds = np.sqrt(np.maximum(drift_mod.decay_integral_steps(spec, times, 2.0), 0.0))
    return decays, stds


def _exact_block(spec, times, seed, path_indices, table=None, xi=None):
    decays, stds = table if table is not None else exact_transition_table(spec, times)
    n = len(times) - 1
    noise = _noise_block(seed, path_indices, n, xi)
    values = np.zeros((len(path_indices), n + 1))
    for k in range(n):
        values[:, k + 1] = decays[k] * values[:, k] + stds[k] * noise[:, k]
    return values


def euler_path(spec, T, h, seed=0, path_index=0, xi=None):
    """One Euler path; xi is a test hook overriding the standard normals."""
    times = _grid(T, h)
    values, dw, warn = _euler_block(spec, times, seed, [path_index], xi)
    return SamplePath(
        times=times,
        values=values[0],
        brownian_increments=dw[0],
        scheme="euler",
        seed=seed,
        path_index=path_index,
        stability_warning=warn,
    )


def exact_path(spec, T, h, seed=0, path_index=0, xi=None):
    """One exact-transition path; every marginal has the true Gaussian law."""
    times = _grid(T, h)
    values = _exact_block(spec, times, seed, [path_index], xi=xi)
    return SamplePath(
        times=times,
        values=values[0],
        brownian_increments=None,
        scheme="exact",
        seed=seed,
        path_index=path_index,
    )


def shift_to_ab(path, a, b, spec):
    """Deterministic shift to the bridge running from a at 0 to b at infinity.

    The shifted process is b + (a - b) exp(-A(t)) + X_t on the same grid,
    driven by the same noise.
    """
    offset = b + (a - b) * np.exp(-drift_mod.eval_antiderivative(spec, path.times))
    return SamplePath(
        times=path.times,
        values=offset + path.values,
        brownian_increments=path.brownian_increments,
        scheme=path.scheme,
        seed=path.seed,
        path_index=path.path_index,
        stability_warning=path.stability_warning,
    )


def _chunks(n_paths, chunk):
    return [range(lo, min(lo + chunk, n_paths)) for lo in range(0, n_paths, chunk)]


def _map_ordered(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _terminal_block(spec, times, snap_idx, seed, path_indices, scheme, table):
    n = len(times) - 1
    h = float(times[1] - times[0])
    out = np.empty((len(path_indices), len(snap_idx)))
    col = {k: j for j, k in enumerate(snap_idx)}
    if scheme == "euler":
        alpha = np.asarray(drift_mod.eval_alpha(spec, times[:-1]), dtype=float)
        dw = math.sqrt(h) * _noise_block(seed, path_indices, n)
        x = np.zeros(len(path_indices))
        if 0 in col:
            out[:, col[0]] = x
        for k in range(n):
            x = (x - (alpha[k] * x) * h) + dw[:, k]
            if k + 1 in col:
                out[:, col[k + 1]] = x
    else:
        decays, stds = table
        noise = _noise_block(seed, path_indices, n)
        x = np.zeros(len(path_indices))
        if 0 in col:
            out[:, col[0]] = x
        for k in range(n):
            x = decays[k] * x + stds[k] * noise[:, k]
            if k + 1 in col:
                out[:, col[k + 1]] = x
    return out


def terminal_values(spec, horizons, h, n_paths, seed, scheme="exact", chunk=4096, threads=1):
    """X at each horizon for n_paths independent paths, shape (n_paths, len(horizons))."""
    horizons = np.asarray(horizons, dtype=float)
    times = _grid(horizons[-1], h)
    snap_idx = [int(round(t / h)) for t in horizons]
    if any(abs(k * h - t) > 1e-9 * max(1.0, t) for k, t in zip(snap_idx, horizons)):
        raise DomainError("horizons must lie on the step grid")
    table = exact_transition_table(spec, times) if scheme == "exact" else None
    blocks = _map_ordered(
        lambda idx: _terminal_block(spec, times, snap_idx, seed, list(idx), scheme, table),
        _chunks(n_paths, chunk),
        threads,
    )
    return np.concatenate(blocks, axis=0)


def batch_terminal_stats(spec, horizons, n_paths, scheme="exact", h=0.05, seed=0, chunk=4096, threads=1):
    """Monte Carlo decay statistics of |X_T| and X_T^2 over a horizon ladder."""
    horizons = np.asarray(horizons, dtype=float)
    if np.any(np.diff(horizons) <= 0):
        raise DomainError("horizons must be strictly increasing")
    if n_paths < 100:
        raise DomainError("need at least 100 paths for stable statistics")
    values = terminal_values(spec, horizons, h, n_paths, seed, scheme, chunk, threads)
    sq = values**2
    return DecayStats(
        horizons=horizons,
        mean_abs=np.abs(values).mean(axis=0),
        mean_sq=sq.mean(axis=0),
        n_paths=n_paths,
        std_err_sq=sq.std(axis=0, ddof=1) / math.sqrt(n_paths),
    )
