"""The urn-model Markov chain behind the coalescent's external branches.

An urn starts with n black balls; each step removes a random pair and adds
one red ball, and the last step removes the final ball.  U_k is the red
count after k steps.  Three equivalent samplers are provided (direct chain,
two-box move/recolor scheme, permutation representation), together with
exact finite-n laws computed in rational arithmetic.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class UrnPath:
    """One trajectory U_0..U_n of red-ball counts."""

    n: int
    u: tuple[int, ...]

    def __post_init__(self):
        n, u = self.n, self.u
        if n < 2:
            raise ValueError("sample size must be at least 2")
        if len(u) != n + 1:
            raise ValueError(f"path must have {n + 1} entries, got {len(u)}")
        if u[0] != 0 or u[n] != 0 or u[1] != 1 or u[n - 1] != 1:
            raise ValueError("path must satisfy U_0=U_n=0 and U_1=U_(n-1)=1")
        for k in range(2, n - 1):
            if not 1 <= u[k] <= min(k, n - k):
                raise ValueError(f"U_{k}={u[k]} outside [1, min(k, n-k)]")
        for k in range(n):
            if abs(u[k + 1] - u[k]) > 1:
                raise ValueError("path increments must lie in {-1, 0, +1}")


@dataclass(frozen=True)
class PermutationPair:
    """Coloring and shifting instances per ball: two permutations of 1..n-1."""

    rho_perm: tuple[int, ...]
    sigma_perm: tuple[int, ...]

    def __post_init__(self):
        m = len(self.rho_perm)
        if len(self.sigma_perm) != m or m < 1:
            raise ValueError("permutations must have equal positive length")
        full = set(range(1, m + 1))
        if set(self.rho_perm) != full or set(self.sigma_perm) != full:
            raise ValueError("each sequence must be a permutation of 1..n-1")


class ExactLaw(Mapping):
    """Discrete law with exact rational probabilities summing to 1."""

    def __init__(self, probs: dict):
        total = ZERO
        for outcome, p in probs.items():
            p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative probability for outcome {outcome}")
            total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self._probs = {o: Fraction(p) for o, p in probs.items() if p != 0}

    def __getitem__(self, outcome):
        return self._probs.get(outcome, ZERO)

    def __iter__(self):
        return iter(self._probs)

    def __len__(self):
        return len(self._probs)

    def mean(self) -> Fraction:
        return sum((Fraction(o) * p for o, p in self._probs.items()), ZERO)

    def to_json_obj(self) -> list[dict]:
        def key(o):
            return str(o)

        return [
            {"outcome": key(o), "num": str(p.numerator), "den": str(p.denominator)}
            for o, p in sorted(self._probs.items(), key=lambda item: key(item[0]))
        ]


def transition_probabilities(n: int, k: int, u: int) -> tuple[Fraction, Fraction, Fraction]:
    """Exact (down, stay, up) probabilities for U_{k+1} given U_k = u.

    Valid for 0 <= k <= n-2; the final step k = n-1 is the deterministic
    removal of the last ball.
    """
    if n < 2:
        raise ValueError("sample size must be at least 2")
    if not 0 <= k <= n - 2:
        raise ValueError(f"transition step k={k} outside 0..n-2")
    balls = n - k
    if not 0 <= u <= balls:
        raise ValueError(f"state u={u} impossible with {balls} balls")
    denom = comb(balls, 2)
    down = Fraction(comb(u, 2), denom)
    stay = Fraction(u * (balls - u), denom)
    up = Fraction(comb(balls - u, 2), denom)
    return down, stay, up


def _float_thresholds(n: int, k: int, u: int) -> tuple[float, float]:
    # Same arithmetic as the vectorized kernel in batch.py; keep in sync.
    balls = n - k
    denom = balls * (balls - 1) / 2.0
    t_down = (u * (u - 1) / 2.0) / denom
    t_stay = t_down + (u * (balls - u)) / denom
    return t_down, t_stay


def sample_urn_path(n: int, rng: np.random.Generator) -> UrnPath:
    """Draw one chain trajectory; consumes one uniform per step k=0..n-2."""
    if n < 2:
        raise ValueError("sample size must be at least 2")
    u = 0
    path = [0]
    for k in range(n - 1):
        w = rng.random()
        t_down, t_stay = _float_thresholds(n, k, u)
        if w < t_down:
            u -= 1
        elif w >= t_stay:
            u += 1
        path.append(u)
    path.append(0)
    return UrnPath(n, tuple(path))


def sample_box_scheme(n: int, rng: np.random.Generator) -> UrnPath:
    """Draw a trajectory via the two-box move/recolor scheme.

    Box A starts with n-1 black balls, box B empty.  Moves (a random ball
    from A to B) alternate with recolorings (a random black ball anywhere
    turns red); U'_k is the red count in A just after the k-th move.  The
    returned path (0, U'_1+1, ..., U'_(n-1)+1, 0) has the chain's law.
    """
    if n < 2:
        raise ValueError("sample size must be at least 2")
    black_a, red_a = n - 1, 0
    black_b, red_b = 0, 0
    path = [0]
    for _ in range(n - 1):
        # move: uniform over balls currently in A
        pick = int(rng.integers(black_a + red_a))
        if pick < black_a:
            black_a -= 1
            black_b += 1
        else:
            red_a -= 1
            red_b += 1
        path.append(red_a + 1)
        # recolor: uniform over black balls in either box
        pick = int(rng.integers(black_a + black_b))
        if pick < black_a:
            black_a -= 1
            red_a += 1
        else:
            black_b -= 1
            red_b += 1
    path.append(0)
    return UrnPath(n, tuple(path))


def sample_permutation_pair(n: int, rng: np.random.Generator) -> PermutationPair:
    """Two independent uniform permutations of 1..n-1 via Fisher-Yates."""
    if n < 2:
        raise ValueError("sample size must be at least 2")

    def shuffle() -> tuple[int, ...]:
        a = list(range(1, n))
        for i in range(len(a) - 1, 0, -1):
            j = int(rng.integers(i + 1))
            a[i], a[j] = a[j], a[i]
        return tuple(a)

    return PermutationPair(shuffle(), shuffle())


def path_from_permutations(pair: PermutationPair) -> UrnPath:
    """Deterministic path U_k = #{m : rho_m < k < sigma_m} + 1, endpoints 0."""
    rho, sigma = pair.rho_perm, pair.sigma_perm
    n = len(rho) + 1
    inner = [
        sum(1 for r, s in zip(rho, sigma) if r < k < s) + 1
        for k in range(1, n)
    ]
    return UrnPath(n, (0, *inner, 0))


MAX_PATH_ENUM_N = 9


def exact_path_law(n: int) -> ExactLaw:
    """Law over whole paths by exact enumeration of the transition products."""
    if not 2 <= n <= MAX_PATH_ENUM_N:
        raise ValueError(f"exact path enumeration limited to n <= {MAX_PATH_ENUM_N}")
    frontier: dict[tuple[int, ...], Fraction] = {(0,): ONE}
    for k in range(n - 1):
        nxt: dict[tuple[int, ...], Fraction] = {}
        for prefix, p in frontier.items():
            u = prefix[-1]
            down, stay, up = transition_probabilities(n, k, u)
            for du, q in ((-1, down), (0, stay), (1, up)):
                if q != 0:
                    nxt[prefix + (u + du,)] = nxt.get(prefix + (u + du,), ZERO) + p * q
        frontier = nxt
    return ExactLaw({prefix + (0,): p for prefix, p in frontier.items()})


MAX_BOX_ENUM_N = 5


def box_scheme_exact_law(n: int) -> ExactLaw:
    """Path law of the box scheme by enumerating all move/recolor outcomes.

    Choices of individual balls collapse to choices of a color weighted by
    the current color counts, which keeps the enumeration small.
    """
    if not 2 <= n <= MAX_BOX_ENUM_N:
        raise ValueError(f"box scheme enumeration limited to n <= {MAX_BOX_ENUM_N}")
    laws: dict[tuple[int, ...], Fraction] = {}

    # state: (black in A, red in A, black in B), prefix of recorded U'_k + 1
    def recurse(step: int, ba: int, ra: int, bb: int, prefix: tuple[int, ...], p: Fraction):
        if step == n - 1:
            path = (0, *prefix, 0)
            laws[path] = laws.get(path, ZERO) + p
            return
        in_a = ba + ra
        for moved_black, w_move in ((True, Fraction(ba, in_a)), (False, Fraction(ra, in_a))):
            if w_move == 0:
                continue
            ba2, ra2, bb2 = (ba - 1, ra, bb + 1) if moved_black else (ba, ra - 1, bb)
            record = prefix + (ra2 + 1,)
            blacks = ba2 + bb2
            for recolor_a, w_rec in ((True, Fraction(ba2, blacks)), (False, Fraction(bb2, blacks))):
                if w_rec == 0:
                    continue
                ba3, ra3, bb3 = (ba2 - 1, ra2 + 1, bb2) if recolor_a else (ba2, ra2, bb2 - 1)
                recurse(step + 1, ba3, ra3, bb3, record, p * w_move * w_rec)

    recurse(0, n - 1, 0, 0, (), ONE)
    return ExactLaw(laws)


MAX_PERM_ENUM_N = 6


def permutation_exact_law(n: int) -> ExactLaw:
    """Path law induced by all ((n-1)!)^2 permutation pairs, exactly."""
    if not 2 <= n <= MAX_PERM_ENUM_N:
        raise ValueError(f"permutation enumeration limited to n <= {MAX_PERM_ENUM_N}")
    m = n - 1
    weight = Fraction(1, factorial(m) ** 2)
    laws: dict[tuple[int, ...], Fraction] = {}
    symbols = tuple(range(1, n))
    for rho in itertools.permutations(symbols):
        for sigma in itertools.permutations(symbols):
            path = path_from_permutations(PermutationPair(rho, sigma)).u
            laws[path] = laws.get(path, ZERO) + weight
    return ExactLaw(laws)


def exact_marginal(n: int, k: int) -> ExactLaw:
    """Law of U_k by forward dynamic programming in rationals."""
    if n < 2:
        raise ValueError("sample size must be at least 2")
    if not 0 <= k <= n:
        raise ValueError(f"step k={k} outside 0..n")
    if k == 0 or k == n:
        return ExactLaw({0: ONE})
    dist: dict[int, Fraction] = {0: ONE}
    for step in range(k):
        nxt: dict[int, Fraction] = {}
        for u, p in dist.items():
            down, stay, up = transition_probabilities(n, step, u)
            for du, q in ((-1, down), (0, stay), (1, up)):
                if q != 0:
                    nxt[u + du] = nxt.get(u + du, ZERO) + p * q
        dist = nxt
    return ExactLaw(dist)


def exact_joint_marginal(n: int, k: int, l: int) -> dict[tuple[int, int], Fraction]:
    """Exact joint law of (U_k, U_l) for k <= l via two-stage DP."""
    if not 0 <= k <= l <= n:
        raise ValueError("need 0 <= k <= l <= n")
    base = exact_marginal(n, k)
    joint: dict[tuple[int, int], Fraction] = {}
    for a, pa in base.items():
        dist = {a: ONE}
        for step in range(k, l):
            if step == n - 1:
                dist = {0: ONE}
                break
            nxt: dict[int, Fraction] = {}
            for u, p in dist.items():
                down, stay, up = transition_probabilities(n, step, u)
                for du, q in ((-1, down), (0, stay), (1, up)):
                    if q != 0:
                        nxt[u + du] = nxt.get(u + du, ZERO) + p * q
            dist = nxt
        for b, pb in dist.items():
            joint[(a, b)] = joint.get((a, b), ZERO) + pa * pb
    return joint


def hypergeometric_pmf(n: int, k: int, r: int) -> Fraction:
    """P(U_k - 1 = r): hypergeometric with parameters n-1, k-1, n-k-1."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"level k={k} outside 1..n-1")
    if r < 0:
        raise ValueError("count r must be nonnegative")
    num = comb(k - 1, r) * comb(n - k, n - k - 1 - r) if n - k - 1 - r >= 0 else 0
    return Fraction(num, comb(n - 1, n - k - 1))


def reverse_path(p: UrnPath) -> UrnPath:
    return UrnPath(p.n, tuple(reversed(p.u)))


def tau(p: UrnPath) -> int:
    """max{k >= 1 : U_(n-k) = k}, the red count when the last black leaves.

    Nonempty for every valid path since U_(n-1) = 1.
    """
    best = 0
    for k in range(1, p.n):
        if p.u[p.n - k] == k:
            best = k
    assert best >= 1
    return best


def tau_first_hit(p: UrnPath) -> int:
    """max{k >= 1 : U_k = k}: the step count before the first red removal."""
    best = 0
    for k in range(1, p.n):
        if p.u[k] == k:
            best = k
    assert best >= 1
    return best


def tau_exact_tail(n: int, k: int) -> Fraction:
    """P(tau_n >= k) = (n-k)...(n-2k+1) / ((n-1)...(n-k))."""
    if n < 2:
        raise ValueError("sample size must be at least 2")
    if k < 1:
        raise ValueError("tail index k must be >= 1")
    if n - 2 * k + 1 < 1:
        return ZERO
    num = 1
    for i in range(n - 2 * k + 1, n - k + 1):
        num *= i
    den = 1
    for i in range(n - k, n):
        den *= i
    return Fraction(num, den)


def tau_exact_law(n: int) -> ExactLaw:
    """Law of tau_n from the exact tail formula."""
    probs: dict[int, Fraction] = {}
    for k in range(1, n // 2 + 1):
        p = tau_exact_tail(n, k) - tau_exact_tail(n, k + 1)
        if p != 0:
            probs[k] = p
    return ExactLaw(probs)
