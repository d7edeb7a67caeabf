"""Closed-form moments and limit laws for the external-length functionals.

Everything with a finite-n closed form is returned as an exact Fraction;
asymptotic quantities and limit-law CDFs are floats and named as such.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .indexing import ceil_pow, check_window

_harmonic_cache: list[Fraction] = [Fraction(0)]


def harmonic(n: int) -> Fraction:
    """n-th harmonic number 1 + 1/2 + ... + 1/n, exactly."""
    if n < 0:
        raise ValueError("harmonic index must be nonnegative")
    while len(_harmonic_cache) <= n:
        j = len(_harmonic_cache)
        _harmonic_cache.append(_harmonic_cache[-1] + Fraction(1, j))
    return _harmonic_cache[n]


# ---------------------------------------------------------------- urn chain

def e_U(n: int, k: int) -> Fraction:
    """E(U_k) = k(n-k)/(n-1)."""
    if n < 2:
        raise ValueError("sample size must be at least 2")
    if not 0 <= k <= n:
        raise ValueError(f"index k={k} outside 0..n")
    return Fraction(k * (n - k), n - 1)


def cov_U(n: int, k: int, l: int) -> Fraction:
    """Cov(U_k, U_l) = k(k-1)(n-l)(n-l-1)/((n-1)^2 (n-2)), k <= l wlog."""
    if n < 3:
        raise ValueError("undefined for n < 3")
    k, l = min(k, l), max(k, l)
    if not 0 <= k <= l <= n:
        raise ValueError("need indices in 0..n")
    return Fraction(k * (k - 1) * (n - l) * (n - l - 1), (n - 1) ** 2 * (n - 2))


# --------------------------------------------------------- merge counts X_k

def e_X(n: int, k: int) -> Fraction:
    """E(X_k) = 2k/(n-1)."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"level k={k} outside 1..n-1")
    return Fraction(2 * k, n - 1)


def var_X(n: int, k: int) -> Fraction:
    """Var(X_k) = 2k(n-k-1)(n-3)/((n-1)^2 (n-2))."""
    if n < 3:
        raise ValueError("undefined for n < 3")
    if not 1 <= k <= n - 1:
        raise ValueError(f"level k={k} outside 1..n-1")
    return Fraction(2 * k * (n - k - 1) * (n - 3), (n - 1) ** 2 * (n - 2))


def cov_X(n: int, k: int, l: int) -> Fraction:
    """Cov(X_k, X_l) = -4k(n-l-1)/((n-1)^2 (n-2)), k < l wlog."""
    if n < 3:
        raise ValueError("undefined for n < 3")
    k, l = min(k, l), max(k, l)
    if not 1 <= k < l <= n - 1:
        raise ValueError("need distinct levels in 1..n-1")
    return Fraction(-4 * k * (n - l - 1), (n - 1) ** 2 * (n - 2))


# ------------------------------------------------------- coalescent times

def e_T(n: int, k: int) -> Fraction:
    """E(T_k) = 2(1/k - 1/n)."""
    if not 1 <= k <= n:
        raise ValueError(f"level k={k} outside 1..n")
    return 2 * (Fraction(1, k) - Fraction(1, n))


def var_T(n: int, k: int) -> Fraction:
    """Var(T_k) = 4 sum_{j=k+1..n} 1/((j-1)^2 j^2), the exact finite sum."""
    if not 1 <= k <= n:
        raise ValueError(f"level k={k} outside 1..n")
    return 4 * sum((Fraction(1, (j - 1) ** 2 * j ** 2) for j in range(k + 1, n + 1)), Fraction(0))


# -------------------------------------------------------- window lengths

def e_L_window(n: int, alpha: float, beta: float) -> Fraction:
    """Exact window mean 2/(n(n-1)) (cb - ca)(2n+1 - cb - ca), ceilings."""
    check_window(alpha, beta)
    ca, cb = ceil_pow(n, alpha), ceil_pow(n, beta)
    return Fraction(2 * (cb - ca) * (2 * n + 1 - cb - ca), n * (n - 1))


def var_L_window_asymptotic(n: int, alpha: float, beta: float) -> float:
    """Asymptotic window variance 8(beta-alpha) ln(n)/n (not exact)."""
    check_window(alpha, beta)
    return 8.0 * (beta - alpha) * math.log(n) / n


def var_L_window_exact(n: int, alpha: float, beta: float) -> float:
    """Numeric exact window variance from the covariance decomposition.

    Var(sum T_k X_k) over the window, using independence of times and
    counts: sum over k,l of Cov(T_k,T_l) E(X_k X_l) plus
    E(T_k)E(T_l) Cov(X_k,X_l), with Cov(T_k,T_l) = Var(T_max(k,l)).
    Quadratic in the window width; intended for moderate n.
    """
    check_window(alpha, beta)
    lo, hi = ceil_pow(n, alpha), ceil_pow(n, beta) - 1
    ks = list(range(lo, hi + 1))
    ks_set = set(ks)
    et = {k: float(e_T(n, k)) for k in ks}
    vt = {}
    acc = Fraction(0)
    for j in range(n, lo, -1):
        acc += Fraction(1, (j - 1) ** 2 * j ** 2)
        if j - 1 in ks_set:
            vt[j - 1] = float(4 * acc)
    ex = {k: float(e_X(n, k)) for k in ks}
    total = 0.0
    for i, k in enumerate(ks):
        total += vt[k] * (float(var_X(n, k)) + ex[k] ** 2)
        total += et[k] ** 2 * float(var_X(n, k))
        for l in ks[i + 1:]:
            cxy = float(cov_X(n, k, l))
            exl = cxy + ex[k] * ex[l]
            total += 2.0 * (vt[l] * exl + et[k] * et[l] * cxy)
    return total


# ----------------------------------------------------- total / truncated

def fu_li_var(n: int) -> Fraction:
    """Var(L_n) = (8n h_n - 16n + 8)/((n-1)(n-2))."""
    if n < 3:
        raise ValueError("undefined for n < 3")
    return Fraction(8 * n) * harmonic(n) / ((n - 1) * (n - 2)) + Fraction(8 - 16 * n, (n - 1) * (n - 2))


def e_hat(n: int, m: int) -> Fraction:
    """Mean of the length truncated below level m: 2(n-m)/(n-1)."""
    if n < 2 or not 1 <= m <= n:
        raise ValueError("need n >= 2 and 1 <= m <= n")
    return Fraction(2 * (n - m), n - 1)


def var_hat(n: int, m: int) -> Fraction:
    """Variance of the truncated length, exact for every n >= 3."""
    if n < 3 or not 1 <= m <= n:
        raise ValueError("need n >= 3 and 1 <= m <= n")
    term1 = 8 * (harmonic(n - 1) - harmonic(m - 1)) * Fraction(n + 2 * m - 2, (n - 1) * (n - 2))
    term2 = Fraction(4 * (n - m) * (4 * n + m - 5), (n - 1) ** 2 * (n - 2))
    return term1 - term2


def rho_cdf(n: int, k: int) -> Fraction:
    """P(rho < k) = k(k-1)/(n(n-1)): law of a random leaf's merge level."""
    if not 1 <= k <= n:
        raise ValueError(f"level k={k} outside 1..n")
    return Fraction(k * (k - 1), n * (n - 1))


# ------------------------------------------------------------- limit laws

def poisson_mean(a: float, b: float = math.inf) -> float:
    """Limit mean count of scaled lengths in [a, b): 4(a^-2 - b^-2)."""
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    tail = 0.0 if math.isinf(b) else b ** -2
    return 4.0 * (a ** -2 - tail)


def r_limit_cdf(x: float) -> float:
    """Limit CDF of n R_n: 1 - 4/(x+2)^2 (density 8(x+2)^-3)."""
    if x < 0:
        raise ValueError("support is x >= 0")
    return 1.0 - 4.0 / (x + 2.0) ** 2


def tau_limit_tail(t: float) -> float:
    """Limit of P(tau_n / sqrt(n) >= t): exp(-t^2)."""
    if t < 0:
        raise ValueError("support is t >= 0")
    return math.exp(-t * t)


def gp_mean(t: float) -> float:
    """Limit of E(U_(nt))/n: t(1-t)."""
    if not 0 <= t <= 1:
        raise ValueError("need 0 <= t <= 1")
    return t * (1.0 - t)


def gp_cov(s: float, t: float) -> float:
    """Limit covariance of the centered scaled chain: s^2 (1-t)^2, s <= t."""
    if not (0 <= s <= 1 and 0 <= t <= 1):
        raise ValueError("need arguments in [0, 1]")
    s, t = min(s, t), max(s, t)
    return s * s * (1.0 - t) ** 2
