"""Vectorized replicate engine: determinism, threading, scalar agreement."""

import numpy as np
import pytest
from scipy.special import gammaincc

from kingman import batch, coalescent, moments, urn
from kingman.rng import replicate_stream

SEED = 2024


def scalar_L(n, rep, seed, stream_id=0):
    rng = replicate_stream(seed, rep, stream_id)
    path = urn.sample_urn_path(n, rng)
    times = coalescent.sample_waiting_times(n, rng)
    return coalescent.total_external_length(times,
                                            coalescent.history_from_urn_path(path))


def test_repeatable():
    a = batch.simulate("L", 20, 300, SEED)
    b = batch.simulate("L", 20, 300, SEED)
    assert a.tobytes() == b.tobytes()


def test_thread_count_invariance():
    for stat, params in (("L", {}), ("tau", {}), ("rho", {}),
                         ("eta_count", {"a": 1.0, "b": 2.0})):
        a = batch.simulate(stat, 40, 2000, SEED, threads=1, **params)
        b = batch.simulate(stat, 40, 2000, SEED, threads=8, **params)
        assert a.tobytes() == b.tobytes()


def test_replicate_count_extension():
    # each replicate owns its stream: a longer run extends a shorter one
    short = batch.simulate("L", 20, batch.CHUNK + 3, SEED)
    long = batch.simulate("L", 20, 2 * batch.CHUNK, SEED)
    assert short.tobytes() == long[: batch.CHUNK + 3].tobytes()


def test_stream_ids_are_disjoint():
    a = batch.simulate("L", 20, 100, SEED, stream_id=1)
    b = batch.simulate("L", 20, 100, SEED, stream_id=2)
    assert not np.array_equal(a, b)


def test_urn_marginal_matches_scalar_exactly():
    n, k = 15, 6
    vals = batch.simulate("urn_marginal", n, 200, SEED, k=k)
    for rep in range(200):
        rng = replicate_stream(SEED, rep)
        path = urn.sample_urn_path(n, rng)
        assert vals[rep] == path.u[k]


def test_total_length_matches_scalar():
    n = 30
    vals = batch.simulate("L", n, 100, SEED)
    for rep in range(100):
        assert vals[rep] == pytest.approx(scalar_L(n, rep, SEED), rel=1e-12)


def test_tau_matches_scalar_exactly():
    n = 25
    vals = batch.simulate("tau", n, 300, SEED)
    for rep in range(300):
        rng = replicate_stream(SEED, rep)
        path = urn.sample_urn_path(n, rng)
        assert vals[rep] == urn.tau(path)


def test_hat_length_matches_scalar():
    n, alpha, beta = 40, 0.4, 0.9
    vals = batch.simulate("L_hat", n, 100, SEED, alpha=alpha, beta=beta)
    for rep in range(100):
        rng = replicate_stream(SEED, rep)
        path = urn.sample_urn_path(n, rng)
        times = coalescent.sample_waiting_times(n, rng)
        hist = coalescent.history_from_urn_path(path)
        expect = coalescent.hat_external_length(times, hist, alpha, beta)
        assert vals[rep] == pytest.approx(expect, rel=1e-10, abs=1e-12)


def test_window_matches_scalar():
    n, alpha, beta = 60, 0.3, 0.8
    vals = batch.simulate("L_window", n, 100, SEED, alpha=alpha, beta=beta)
    for rep in range(100):
        rng = replicate_stream(SEED, rep)
        path = urn.sample_urn_path(n, rng)
        times = coalescent.sample_waiting_times(n, rng)
        hist = coalescent.history_from_urn_path(path)
        expect = coalescent.window_external_length(times, hist, alpha, beta)
        assert vals[rep] == pytest.approx(expect, rel=1e-12)


def test_eta_count_matches_scalar():
    n, a, b = 50, 0.5, 3.0
    vals = batch.simulate("eta_count", n, 200, SEED, a=a, b=b)
    for rep in range(200):
        rng = replicate_stream(SEED, rep)
        path = urn.sample_urn_path(n, rng)
        times = coalescent.sample_waiting_times(n, rng)
        hist = coalescent.history_from_urn_path(path)
        pattern = coalescent.scaled_point_pattern(times, hist)
        assert vals[rep] == pattern.count(a, b)


def test_window_pair_columns_match_single_windows():
    n = 80
    pair = batch.simulate("window_pair", n, 400, SEED,
                          window1=(0.0, 0.5), window2=(0.5, 1.0))
    col0 = batch.simulate("L_window", n, 400, SEED, alpha=0.0, beta=0.5)
    col1 = batch.simulate("L_window", n, 400, SEED, alpha=0.5, beta=1.0)
    assert pair[:, 0].tobytes() == col0.tobytes()
    assert pair[:, 1].tobytes() == col1.tobytes()


def test_urn_snapshot_is_two_dimensional():
    snap = batch.simulate("urn_snapshot", 30, 50, SEED, steps=[15])
    assert snap.shape == (50, 1)
    snap3 = batch.simulate("urn_snapshot", 30, 50, SEED, steps=[5, 15, 25])
    assert snap3.shape == (50, 3)
    marg = batch.simulate("urn_marginal", 30, 50, SEED, k=15)
    assert snap[:, 0].tobytes() == marg.tobytes()


def test_rho_frequencies():
    n, reps = 10, 50_000
    vals = batch.simulate("rho", n, reps, SEED).astype(int)
    pmf = [float(moments.rho_cdf(n, k + 1) - moments.rho_cdf(n, k))
           for k in range(1, n)]
    counts = np.bincount(vals, minlength=n)[1:n]
    chi2 = sum((counts[i] - reps * pmf[i]) ** 2 / (reps * pmf[i])
               for i in range(n - 1))
    p_value = float(gammaincc((n - 2) / 2.0, chi2 / 2.0))
    assert p_value > 0.001


def test_urn_marginal_frequencies():
    n, k, reps = 12, 5, 50_000
    vals = batch.simulate("urn_marginal", n, reps, SEED, k=k).astype(int)
    law = {u: float(p) for u, p in urn.exact_marginal(n, k).items()}
    chi2 = sum((np.count_nonzero(vals == u) - reps * p) ** 2 / (reps * p)
               for u, p in law.items())
    p_value = float(gammaincc((len(law) - 1) / 2.0, chi2 / 2.0))
    assert p_value > 0.001


def test_jit_and_numpy_urn_kernels_agree():
    pytest.importorskip("numba")
    n, count = 37, 64
    w = batch._uniform_rows(SEED, 0, 0, count, n - 1)
    a = batch._urn_paths_numpy(n, w)
    b = batch._urn_paths(n, w)  # the jit-backed kernel when numba is present
    assert np.array_equal(a, b)


def test_input_validation():
    with pytest.raises(ValueError):
        batch.simulate("L", 1, 10, SEED)
    with pytest.raises(ValueError):
        batch.simulate("L", 10, 0, SEED)
    with pytest.raises(ValueError):
        batch.simulate("no_such_statistic", 10, 10, SEED)
    with pytest.raises(ValueError):
        batch.simulate("eta_count", 10, 10, SEED, a=2.0, b=1.0)
    with pytest.raises(ValueError):
        batch.simulate("L_window", 10, 10, SEED, alpha=0.9, beta=0.2)
