"""Goodness-of-fit machinery: samples in, pass/fail reports out.

All tests are deterministic given their sample (which is deterministic
given a seed), and every report serializes to one JSON object.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaincc

from .indexing import ceil_pow
from . import batch, moments

P_FLOOR = 0.001
MEAN_Z_MAX = 4.0
MIN_EXPECTED_CELL = 5.0
KOLMOGOROV_TERMS = 100


@dataclass(frozen=True)
class EmpiricalSample:
    """A replicated simulation result with its provenance."""

    values: np.ndarray
    n: int
    reps: int
    seed: int
    statistic_name: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if self.reps < 1 or len(values) != self.reps:
            raise ValueError("reps must be positive and match the value count")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class TestReport:
    name: str
    params: dict
    statistic: float
    p_or_distance: float
    threshold: float
    passed: bool
    seed: int
    reps: int

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "statistic": self.statistic,
            "p_or_distance": self.p_or_distance,
            "threshold": self.threshold,
            "pass": self.passed,
            "seed": self.seed,
            "reps": self.reps,
        }, sort_keys=False)


def kolmogorov_sf(lam: float) -> float:
    """P(K > lam) for the Kolmogorov distribution, series to 100 terms."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for j in range(1, KOLMOGOROV_TERMS + 1):
        total += (-1) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return min(1.0, max(0.0, 2.0 * total))


def ks_statistic(values: np.ndarray, cdf: Callable[[float], float]) -> float:
    """One-sample KS distance sup |F_emp - F|."""
    x = np.sort(np.asarray(values, dtype=float))
    m = len(x)
    if m == 0:
        raise ValueError("empty sample")
    f = np.array([cdf(v) for v in x])
    i = np.arange(1, m + 1)
    return float(max(np.max(f - (i - 1) / m), np.max(i / m - f)))


def ks_test(sample: EmpiricalSample, cdf: Callable[[float], float], *,
            name: str, p_floor: float = P_FLOOR, params: dict | None = None) -> TestReport:
    """KS test with an asymptotic p-value; passes when p >= p_floor."""
    if sample.reps < 100:
        raise ValueError("KS test requires at least 100 replicates")
    d = ks_statistic(sample.values, cdf)
    p = kolmogorov_sf(math.sqrt(sample.reps) * d)
    return TestReport(name, dict(params or {}), d, p, p_floor, p >= p_floor,
                      sample.seed, sample.reps)


def ks_distance_test(sample: EmpiricalSample, cdf: Callable[[float], float], *,
                     name: str, d_max: float, params: dict | None = None) -> TestReport:
    """KS check against a limit law at a fixed distance tolerance."""
    d = ks_statistic(sample.values, cdf)
    return TestReport(name, dict(params or {}), d, d, d_max, d <= d_max,
                      sample.seed, sample.reps)


def chi_square_gof(sample: EmpiricalSample, expected: Mapping, *,
                   name: str, p_floor: float = P_FLOOR, params: dict | None = None) -> TestReport:
    """Pearson chi-square of integer outcomes against an exact law.

    ``expected`` maps integer outcomes to probabilities (Fractions or
    floats) summing to 1.  Cells are merged greedily from the high tail,
    then from the low tail, until every cell's expected mass is at least 5.
    """
    values = sample.values.astype(int)
    if np.any(values != sample.values):
        raise ValueError("chi-square sample must be integer-valued")
    outcomes = sorted(expected)
    support = set(outcomes)
    if any(int(v) not in support for v in values):
        bad = next(int(v) for v in values if int(v) not in support)
        raise ValueError(f"observed outcome {bad} has zero expected probability")
    reps = sample.reps
    obs = [int(np.count_nonzero(values == o)) for o in outcomes]
    exp = [float(expected[o]) * reps for o in outcomes]

    def merge_tail(obs, exp):
        while len(obs) > 1 and exp[-1] < MIN_EXPECTED_CELL:
            exp[-2] += exp[-1]
            obs[-2] += obs[-1]
            del exp[-1], obs[-1]
        return obs, exp

    obs, exp = merge_tail(obs, exp)
    obs, exp = [list(reversed(s)) for s in merge_tail(obs[::-1], exp[::-1])]
    if len(obs) < 2:
        raise ValueError("fewer than two cells remain after merging")
    stat = sum((o - e) ** 2 / e for o, e in zip(obs, exp))
    dof = len(obs) - 1
    p = float(gammaincc(dof / 2.0, stat / 2.0))
    all_params = dict(params or {})
    all_params["cells"] = len(obs)
    return TestReport(name, all_params, stat, p, p_floor, p >= p_floor,
                      sample.seed, reps)


def mean_test(sample: EmpiricalSample, exact_mean, exact_var=None, *,
              name: str, params: dict | None = None) -> TestReport:
    """Four-standard-error gate on the sample mean.

    The standard error comes from the exact variance when provided, else
    from the sample variance.
    """
    if sample.reps < 1000:
        raise ValueError("mean test requires at least 1000 replicates")
    mu = float(np.mean(sample.values))
    var = float(exact_var) if exact_var is not None else float(np.var(sample.values, ddof=1))
    se = math.sqrt(var / sample.reps)
    if se == 0.0:
        z = 0.0 if mu == float(exact_mean) else math.inf
    else:
        z = (mu - float(exact_mean)) / se
    return TestReport(name, dict(params or {}), mu, abs(z), MEAN_Z_MAX,
                      abs(z) <= MEAN_Z_MAX, sample.seed, sample.reps)


def variance_test(sample: EmpiricalSample, exact_var, rel_tol: float, *,
                  name: str, params: dict | None = None) -> TestReport:
    """Relative-tolerance gate on the sample variance."""
    if sample.reps < 10_000:
        raise ValueError("variance test requires at least 10^4 replicates")
    v = float(np.var(sample.values, ddof=1))
    target = float(exact_var)
    rel = abs(v - target) / target
    return TestReport(name, dict(params or {}), v, rel, rel_tol, rel <= rel_tol,
                      sample.seed, sample.reps)


def independence_check(sample_a: EmpiricalSample, sample_b: EmpiricalSample, *,
                       name: str, params: dict | None = None) -> TestReport:
    """Near-zero-correlation gate for paired samples."""
    if sample_a.reps != sample_b.reps:
        raise ValueError("paired samples must have equal length")
    reps = sample_a.reps
    corr = float(np.corrcoef(sample_a.values, sample_b.values)[0, 1])
    limit = 4.0 / math.sqrt(reps) + 0.02
    return TestReport(name, dict(params or {}), corr, abs(corr), limit,
                      abs(corr) <= limit, sample_a.seed, reps)


def gp_check(n: int, grid: list[tuple[float, float]], reps: int, seed: int, *,
             threads: int = 1, stream_id: int = 0, name: str = "gp_covariance") -> TestReport:
    """Covariance check of the centered, scaled chain against s^2 (1-t)^2.

    Simulates W(t) = (U_(floor(nt)) - n t(1-t)) / sqrt(n) and requires every
    grid covariance within 0.01 + 4 MC standard errors of the limit, and
    every grid mean within 4 standard errors of 0.
    """
    if not grid:
        raise ValueError("grid must be nonempty")
    if n < 500:
        raise ValueError("chain too short for the limit comparison (need n >= 500)")
    ts = sorted({v for st in grid for v in st})
    if any(not 0 < t < 1 for t in ts):
        raise ValueError("grid points must lie strictly inside (0, 1)")
    steps = [math.floor(n * t) for t in ts]
    col = {t: i for i, t in enumerate(ts)}
    snap = batch.simulate("urn_snapshot", n, reps, seed, threads=threads,
                          stream_id=stream_id, steps=steps)
    w = (snap - np.array([n * t * (1 - t) for t in ts])) / math.sqrt(n)
    worst = -math.inf
    for t in ts:
        m = float(np.mean(w[:, col[t]]))
        se = float(np.std(w[:, col[t]], ddof=1)) / math.sqrt(reps)
        worst = max(worst, abs(m) - 4.0 * se)
    for s, t in grid:
        s, t = min(s, t), max(s, t)
        prod = w[:, col[s]] * w[:, col[t]]
        emp = float(np.mean(prod))
        se = float(np.std(prod, ddof=1)) / math.sqrt(reps)
        dev = abs(emp - moments.gp_cov(s, t)) - (0.01 + 4.0 * se)
        worst = max(worst, dev)
    return TestReport(name, {"n": n, "grid": [list(p) for p in grid]},
                      worst, worst, 0.0, worst <= 0.0, seed, reps)


def theorem4_bound_check(n: int, beta: float, reps: int, seed: int, *,
                         threads: int = 1, stream_id: int = 0,
                         name: str = "vanishing_window_bound") -> TestReport:
    """Check P(short-window length > 0) against its exact finite-n bound.

    The event {window length > 0} equals {V_m < m} with m = ceil(n**beta);
    the bound is m(m-1)/(n-1), tested with a four-standard-error allowance.
    """
    if not 0 < beta < 0.5:
        raise ValueError("need 0 < beta < 1/2")
    m = ceil_pow(n, beta)
    bound = float(Fraction(m * (m - 1), n - 1))
    if m == 1:
        emp, allowance = 0.0, 0.0
    else:
        v_m = batch.simulate("urn_snapshot", n, reps, seed, threads=threads,
                             stream_id=stream_id, steps=[n - m])[:, 0]
        emp = float(np.mean(v_m < m))
        allowance = 4.0 * math.sqrt(bound * (1.0 - bound) / reps)
    limit = bound + allowance
    return TestReport(name, {"n": n, "beta": beta, "m": m, "bound": bound},
                      emp, emp, limit, emp <= limit, seed, reps)


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
