"""Acceptance suites: exact rational identities and seeded statistical checks.

The exact suite proves finite-n identities outright (no randomness).  The
statistical suite runs seeded Monte Carlo at desk scale with pinned
thresholds; it is deterministic for a fixed seed and thread-independent.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import batch, moments, stats, urn

DEFAULT_SEED = 7

# stream ids keep the statistical criteria on disjoint random streams
_S_TOTAL, _S_HAT, _S_ETA, _S_T4, _S_TAU, _S_R, _S_GP, _S_IND = range(1, 9)


def _exact_report(name: str, violations: int, checks: int, seed: int,
                  params: dict | None = None) -> stats.TestReport:
    p = dict(params or {})
    p["checks"] = checks
    return stats.TestReport(name, p, float(violations), float(violations),
                            0.0, violations == 0, seed, 0)


# ------------------------------------------------------------- exact suite

def check_reversibility(seed: int = DEFAULT_SEED) -> stats.TestReport:
    """Path law invariant under time reversal for every n up to 9."""
    bad = checks = 0
    for n in range(2, urn.MAX_PATH_ENUM_N + 1):
        law = urn.exact_path_law(n)
        for path, p in law.items():
            checks += 1
            if law[tuple(reversed(path))] != p:
                bad += 1
    return _exact_report("reversibility_exact", bad, checks, seed, {"n_max": 9})


def check_chain_moments(seed: int = DEFAULT_SEED) -> stats.TestReport:
    """DP means and covariances equal the closed forms for n <= 12."""
    bad = checks = 0
    for n in range(2, 13):
        for k in range(n + 1):
            checks += 1
            if urn.exact_marginal(n, k).mean() != moments.e_U(n, k):
                bad += 1
        if n < 3:
            continue
        for k in range(n + 1):
            for l in range(k, n + 1):
                joint = urn.exact_joint_marginal(n, k, l)
                e_kl = sum((Fraction(a * b) * p for (a, b), p in joint.items()), Fraction(0))
                cov = e_kl - moments.e_U(n, k) * moments.e_U(n, l)
                checks += 1
                if cov != moments.cov_U(n, k, l):
                    bad += 1
    return _exact_report("chain_moments_exact", bad, checks, seed, {"n_max": 12})


def check_hypergeometric(seed: int = DEFAULT_SEED, n_max: int = 50) -> stats.TestReport:
    """Forward-DP marginals equal the shifted hypergeometric for n <= 50."""
    bad = checks = 0
    for n in range(2, n_max + 1):
        dist = {0: Fraction(1)}
        for k in range(1, n):
            nxt: dict[int, Fraction] = {}
            for u, p in dist.items():
                down, stay, up = urn.transition_probabilities(n, k - 1, u)
                for du, q in ((-1, down), (0, stay), (1, up)):
                    if q != 0:
                        nxt[u + du] = nxt.get(u + du, Fraction(0)) + p * q
            dist = nxt
            for u in range(1, min(k, n - k) + 1):
                checks += 1
                if dist.get(u, Fraction(0)) != urn.hypergeometric_pmf(n, k, u - 1):
                    bad += 1
            if any(u < 1 or u > min(k, n - k) for u in dist):
                bad += 1
    return _exact_report("hypergeometric_marginal_exact", bad, checks, seed, {"n_max": n_max})


def check_permutation_representation(seed: int = DEFAULT_SEED) -> stats.TestReport:
    """All ((n-1)!)^2 permutation pairs reproduce the path law, n <= 6."""
    bad = checks = 0
    for n in range(2, urn.MAX_PERM_ENUM_N + 1):
        perm_law = urn.permutation_exact_law(n)
        chain_law = urn.exact_path_law(n)
        outcomes = set(perm_law) | set(chain_law)
        for path in outcomes:
            checks += 1
            if perm_law[path] != chain_law[path]:
                bad += 1
    return _exact_report("permutation_representation_exact", bad, checks, seed, {"n_max": 6})


def check_box_scheme(seed: int = DEFAULT_SEED) -> stats.TestReport:
    """Enumerated box-scheme law equals the chain law for n <= 5."""
    bad = checks = 0
    for n in range(2, urn.MAX_BOX_ENUM_N + 1):
        box_law = urn.box_scheme_exact_law(n)
        chain_law = urn.exact_path_law(n)
        outcomes = set(box_law) | set(chain_law)
        for path in outcomes:
            checks += 1
            if box_law[path] != chain_law[path]:
                bad += 1
    return _exact_report("box_scheme_exact", bad, checks, seed, {"n_max": 5})


def check_variance_identity(seed: int = DEFAULT_SEED, n_max: int = 10_000) -> stats.TestReport:
    """Truncated-length variance at m=1 recovers the total-length variance."""
    bad = 0
    for n in range(3, n_max + 1):
        if moments.var_hat(n, 1) != moments.fu_li_var(n):
            bad += 1
    return _exact_report("variance_identity_exact", bad, n_max - 2, seed, {"n_max": n_max})


def check_martingale_identity(seed: int = DEFAULT_SEED, n_max: int = 100) -> stats.TestReport:
    """sum_u' p(u'|u) u' == ((n-k-2)/(n-k)) u + 1 for every state."""
    bad = checks = 0
    for n in range(2, n_max + 1):
        for k in range(n - 1):
            u_values = (0,) if k == 0 else range(1, min(k, n - k) + 1)
            for u in u_values:
                down, stay, up = urn.transition_probabilities(n, k, u)
                lhs = down * (u - 1) + stay * u + up * (u + 1)
                rhs = Fraction(n - k - 2, n - k) * u + 1
                checks += 1
                if lhs != rhs:
                    bad += 1
    return _exact_report("martingale_identity_exact", bad, checks, seed, {"n_max": n_max})


def check_tau_tail(seed: int = DEFAULT_SEED) -> stats.TestReport:
    """Product-formula tail equals the enumeration tail for n <= 9."""
    bad = checks = 0
    for n in range(2, urn.MAX_PATH_ENUM_N + 1):
        law = urn.exact_path_law(n)
        taus = {path: urn.tau(urn.UrnPath(n, path)) for path in law}
        for k in range(1, n + 1):
            enum_tail = sum((p for path, p in law.items() if taus[path] >= k), Fraction(0))
            checks += 1
            if enum_tail != urn.tau_exact_tail(n, k):
                bad += 1
    return _exact_report("tau_tail_exact", bad, checks, seed, {"n_max": 9})


def exact_suite(seed: int = DEFAULT_SEED) -> list[stats.TestReport]:
    return [
        check_reversibility(seed),
        check_chain_moments(seed),
        check_hypergeometric(seed),
        check_permutation_representation(seed),
        check_box_scheme(seed),
        check_variance_identity(seed),
        check_martingale_identity(seed),
        check_tau_tail(seed),
    ]


# ------------------------------------------------------- statistical suite

def _sample(statistic: str, n: int, reps: int, seed: int, stream_id: int,
            threads: int, **params) -> stats.EmpiricalSample:
    values = batch.simulate(statistic, n, reps, seed, threads=threads,
                            stream_id=stream_id, **params)
    return stats.EmpiricalSample(values, n, reps, seed, statistic)


def _poisson_support(mean: float, top: int = 40) -> dict[int, float]:
    probs = {j: math.exp(-mean) * mean ** j / math.factorial(j) for j in range(top)}
    probs[top] = max(0.0, 1.0 - sum(probs.values()))
    return probs


def statistical_suite(seed: int = DEFAULT_SEED, threads: int = 1) -> list[stats.TestReport]:
    reports: list[stats.TestReport] = []

    # total external length at n=50: mean exactly 2, Fu-Li variance
    n, reps = 50, 100_000
    total = _sample("L", n, reps, seed, _S_TOTAL, threads)
    fl_var = moments.fu_li_var(n)
    reports.append(stats.mean_test(total, 2, fl_var, name="total_length_mean",
                                   params={"n": n}))
    reports.append(stats.variance_test(total, fl_var, 0.05,
                                       name="total_length_variance", params={"n": n}))

    # normality of the truncated length at n=50, alpha=1/2
    n, reps, m = 50, 10_000, 7
    hat = _sample("L_hat", n, reps, seed, _S_HAT, threads, alpha=0.5, beta=1.0)
    mu, sig = float(moments.e_hat(n, m)), math.sqrt(float(moments.var_hat(n, m)))
    standardized = stats.EmpiricalSample((hat.values - mu) / sig, n, reps, seed,
                                         "standardized_truncated_length")
    reports.append(stats.ks_test(standardized, stats.normal_cdf,
                                 name="truncated_length_normality",
                                 params={"n": n, "alpha": 0.5}))

    # Poisson counts of scaled branch lengths on [1, 2)
    n, reps = 10_000, 10_000
    eta = _sample("eta_count", n, reps, seed, _S_ETA, threads, a=1.0, b=2.0)
    lam = moments.poisson_mean(1.0, 2.0)
    reports.append(stats.chi_square_gof(eta, _poisson_support(lam),
                                        name="scaled_point_counts_poisson",
                                        params={"n": n, "a": 1.0, "b": 2.0, "mean": lam}))
    reports.append(stats.mean_test(eta, lam, lam, name="scaled_point_counts_mean",
                                   params={"n": n, "a": 1.0, "b": 2.0}))

    # short windows are empty: exact finite-n bound
    reports.append(stats.theorem4_bound_check(10_000, 0.25, 10_000, seed,
                                              threads=threads, stream_id=_S_T4))

    # tau / sqrt(n) against the exp(-t^2) tail
    n, reps = 10_000, 10_000
    tau_sample = _sample("tau", n, reps, seed, _S_TAU, threads)
    scaled = stats.EmpiricalSample(tau_sample.values / math.sqrt(n), n, reps, seed,
                                   "tau_scaled")
    reports.append(stats.ks_distance_test(
        scaled, lambda t: 1.0 - moments.tau_limit_tail(max(t, 0.0)),
        name="tau_limit_ks", d_max=0.03, params={"n": n}))

    # single random branch length: n R_n against the (x+2)^-3 law
    n, reps = 1_000, 100_000
    r_sample = _sample("R", n, reps, seed, _S_R, threads)
    scaled_r = stats.EmpiricalSample(n * r_sample.values, n, reps, seed, "n_R_n")
    reports.append(stats.ks_distance_test(scaled_r, moments.r_limit_cdf,
                                          name="single_branch_limit_ks",
                                          d_max=0.05, params={"n": n}))

    # Gaussian-process covariance of the centered chain
    grid = [(s, t) for s in (0.25, 0.5, 0.75) for t in (0.25, 0.5, 0.75) if s <= t]
    reports.append(stats.gp_check(2_000, grid, 10_000, seed,
                                  threads=threads, stream_id=_S_GP))

    # asymptotic independence of adjacent windows
    n, reps = 200, 10_000
    pair = batch.simulate("window_pair", n, reps, seed, threads=threads,
                          stream_id=_S_IND, window1=(0.5, 0.75), window2=(0.75, 1.0))
    sa = stats.EmpiricalSample(pair[:, 0], n, reps, seed, "window_0.5_0.75")
    sb = stats.EmpiricalSample(pair[:, 1], n, reps, seed, "window_0.75_1.0")
    reports.append(stats.independence_check(sa, sb, name="window_independence",
                                            params={"n": n}))
    return reports


def run_suite(name: str, seed: int = DEFAULT_SEED, threads: int = 1) -> list[stats.TestReport]:
    if name == "exact":
        return exact_suite(seed)
    if name == "statistical":
        return statistical_suite(seed, threads)
    if name == "all":
        return exact_suite(seed) + statistical_suite(seed, threads)
    raise ValueError(f"unknown suite {name!r}")
