"""Vectorized, reproducible Monte Carlo over replicates.

Replicate r draws from its own counter-based stream (see rng.py), and
replicates are processed in fixed-size chunks whose boundaries do not
depend on the thread count, so any statistic simulated here is bitwise
reproducible for a given (seed, n, reps) no matter how work is scheduled.

The per-replicate draw order matches the scalar samplers in urn.py and
coalescent.py: first the n-1 urn-transition uniforms, then (if the
statistic needs times) the n-1 waiting-time uniforms in descending k.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .indexing import ceil_pow, check_window, floor_pow
from .rng import replicate_stream

CHUNK = 512

_TIME_STATS = {"L", "L_window", "L_hat", "eta_count", "window_pair"}
_URN_STATS = {"tau", "urn_marginal"} | _TIME_STATS


def _uniform_rows(seed: int, stream_id: int, start: int, count: int, draws: int) -> np.ndarray:
    out = np.empty((count, draws))
    for i in range(count):
        out[i] = replicate_stream(seed, start + i, stream_id).random(draws)
    return out


def _urn_paths_numpy(n: int, w: np.ndarray) -> np.ndarray:
    """Step the chain for each row of uniforms w (count, n-1).

    Returns int32 trajectories of shape (count, n+1).  Threshold
    arithmetic mirrors urn._float_thresholds exactly; the jit kernel
    below agrees bitwise.
    """
    count = w.shape[0]
    paths = np.zeros((count, n + 1), dtype=np.int32)
    u = np.zeros(count, dtype=np.int32)
    for k in range(n - 1):
        balls = n - k
        denom = balls * (balls - 1) / 2.0
        t_down = (u * (u - 1) / 2.0) / denom
        t_stay = t_down + (u * (balls - u)) / denom
        wk = w[:, k]
        u = u - (wk < t_down) + (wk >= t_stay)
        paths[:, k + 1] = u
    return paths


try:
    from numba import njit

    @njit(cache=True, nogil=True)
    def _urn_paths_jit(n, w, paths):  # pragma: no cover - thin jit wrapper
        count = w.shape[0]
        for i in range(count):
            u = 0
            for k in range(n - 1):
                balls = n - k
                denom = balls * (balls - 1) / 2.0
                t_down = (u * (u - 1) / 2.0) / denom
                t_stay = t_down + (u * (balls - u)) / denom
                wk = w[i, k]
                if wk < t_down:
                    u -= 1
                elif wk >= t_stay:
                    u += 1
                paths[i, k + 1] = u

    def _urn_paths(n: int, w: np.ndarray) -> np.ndarray:
        paths = np.zeros((w.shape[0], n + 1), dtype=np.int32)
        _urn_paths_jit(n, np.ascontiguousarray(w), paths)
        return paths

except ImportError:  # pragma: no cover
    _urn_paths = _urn_paths_numpy


def _times(n: int, w: np.ndarray) -> np.ndarray:
    """T_1..T_(n-1) per row from waiting-time uniforms (descending k order).

    Column j of w drives level k = n - j.  Returns shape (count, n-1) with
    column k-1 holding T_k; T_n = 0 is implicit.
    """
    ks = np.arange(n, 1, -1, dtype=float)
    inc = -np.log1p(-w) / (ks * (ks - 1) / 2.0)
    cs = np.cumsum(inc, axis=1)
    return cs[:, ::-1]


def _merge_counts(paths: np.ndarray) -> np.ndarray:
    """X_1..X_(n-1) per row from trajectories, via X_k = 1 + U_(n-k) - U_(n-k-1)."""
    n = paths.shape[1] - 1
    diff = paths[:, 1:n] - paths[:, 0:n - 1]
    return (1 + diff[:, ::-1]).astype(np.int32)


def _rho_inverse_cdf(n: int, w: np.ndarray) -> np.ndarray:
    """Merge level of a tagged leaf by CDF inversion of P(rho <= k)."""
    ks = np.arange(1, n, dtype=float)
    cdf = (ks + 1.0) * ks / (n * (n - 1.0))
    return np.searchsorted(cdf, w, side="right") + 1


def _chunk_kernel(statistic: str, n: int, seed: int, stream_id: int,
                  start: int, count: int, params: dict) -> np.ndarray:
    if statistic == "rho":
        w = _uniform_rows(seed, stream_id, start, count, 1)
        return _rho_inverse_cdf(n, w[:, 0]).astype(float).reshape(-1, 1)

    if statistic == "R":
        w = _uniform_rows(seed, stream_id, start, count, n)
        rho = _rho_inverse_cdf(n, w[:, 0])
        t = _times(n, w[:, 1:])
        return t[np.arange(count), rho - 1].reshape(-1, 1)

    draws = 2 * (n - 1) if statistic in _TIME_STATS else n - 1
    w = _uniform_rows(seed, stream_id, start, count, draws)
    paths = _urn_paths(n, w[:, :n - 1])

    if statistic == "tau":
        lvl = n - np.arange(1, n)
        hits = paths[:, 1:n] == lvl
        jmin = 1 + np.argmax(hits, axis=1)
        return (n - jmin).astype(float).reshape(-1, 1)

    if statistic == "urn_marginal":
        return paths[:, params["k"]].astype(float).reshape(-1, 1)

    if statistic == "urn_snapshot":
        steps = np.asarray(params["steps"], dtype=int)
        return paths[:, steps].astype(float)

    t = _times(n, w[:, n - 1:])

    if statistic == "L_hat":
        alpha, beta = params["alpha"], params["beta"]
        check_window(alpha, beta)
        m, big_m = max(floor_pow(n, alpha), 1), floor_pow(n, beta)
        # increments T_(k-1) - T_k for k = 2..n, aligned so column k-2 is level k
        inc = np.empty((count, n - 1))
        inc[:, :n - 2] = t[:, 0:n - 2] - t[:, 1:n - 1]
        inc[:, n - 2] = t[:, n - 2]  # T_(n-1) - T_n with T_n = 0
        ks = np.arange(2, n + 1)
        weight = ks[None, :] - paths[:, n - ks]
        contrib = inc * weight

        def tail(lo: int) -> np.ndarray:
            return contrib[:, lo - 1:].sum(axis=1)

        return (tail(m) - tail(big_m)).reshape(-1, 1)

    x = _merge_counts(paths)

    if statistic == "L":
        return (t * x).sum(axis=1).reshape(-1, 1)

    if statistic == "L_window":
        alpha, beta = params["alpha"], params["beta"]
        check_window(alpha, beta)
        lo, hi = ceil_pow(n, alpha), ceil_pow(n, beta) - 1
        lo, hi = max(lo, 1), min(hi, n - 1)
        return (t[:, lo - 1:hi] * x[:, lo - 1:hi]).sum(axis=1).reshape(-1, 1)

    if statistic == "window_pair":
        out = np.empty((count, 2))
        for col, (a, b) in enumerate((params["window1"], params["window2"])):
            check_window(a, b)
            lo, hi = max(ceil_pow(n, a), 1), min(ceil_pow(n, b) - 1, n - 1)
            out[:, col] = (t[:, lo - 1:hi] * x[:, lo - 1:hi]).sum(axis=1)
        return out

    if statistic == "eta_count":
        a, b = params["a"], params["b"]
        if not 0 < a < b:
            raise ValueError("need 0 < a < b")
        pts = math.sqrt(n) * t
        mask = (pts >= a) & (pts < b)
        return (x * mask).sum(axis=1).astype(float).reshape(-1, 1)

    raise ValueError(f"unknown statistic {statistic!r}")


def simulate(statistic: str, n: int, reps: int, seed: int, *,
             threads: int = 1, stream_id: int = 0, **params) -> np.ndarray:
    """Simulate one value (or row) per replicate.

    Returns a 1-D array of length reps, or 2-D (reps, d) for the
    multi-column statistics (urn_snapshot, window_pair).
    """
    if n < 2:
        raise ValueError("sample size must be at least 2")
    if reps < 1:
        raise ValueError("need at least one replicate")
    starts = list(range(0, reps, CHUNK))

    def work(start: int) -> np.ndarray:
        count = min(CHUNK, reps - start)
        return _chunk_kernel(statistic, n, seed, stream_id, start, count, params)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pieces = list(pool.map(work, starts))
    else:
        pieces = [work(s) for s in starts]
    out = np.concatenate(pieces, axis=0)
    if statistic in ("urn_snapshot", "window_pair"):
        return out
    return out[:, 0]
