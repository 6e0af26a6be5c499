"""Gauss hypergeometric series and the composition-count identity.

Small self-contained evaluator for 2F1 at real arguments plus the
combinatorial cross-check that the number of ways to write L as an
ordered sum of M non-negative parts is binom(L+M-1, M-1), whose squared
generating function is 2F1(M, M; 1; x).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import Divergence, NonConvergence

_MAX_TERMS = 1_000_000


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1); (a)_0 = 1."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


def _is_nonpositive_int(a: float) -> bool:
    return a <= 0.0 and float(a).is_integer()


def hyp2f1(a: float, b: float, c: float, x: float,
           rel_tol: float = 1e-16) -> float:
    """Sum of the series 2F1(a, b; c; x) = sum (a)_n (b)_n / (c)_n x^n / n!.

    Terminates exactly when a or b is a non-positive integer; otherwise
    accumulates until the next term falls below ``rel_tol`` relative to
    the partial sum, which requires |x| < 1.
    """
    if _is_nonpositive_int(c):
        raise ValueError(f"c = {c} is a non-positive integer")
    n_stop = None
    if _is_nonpositive_int(a):
        n_stop = int(-a)
    if _is_nonpositive_int(b):
        n_stop = int(-b) if n_stop is None else min(n_stop, int(-b))
    if n_stop is None and abs(x) >= 1.0:
        raise Divergence(f"series diverges at x = {x} with non-terminating parameters")
    total = 0.0
    term = 1.0
    n = 0
    while True:
        total += term
        if n_stop is not None and n >= n_stop:
            break
        if n_stop is None and abs(term) <= rel_tol * abs(total) and n > 0:
            break
        if n >= _MAX_TERMS:
            raise NonConvergence(f"no convergence after {_MAX_TERMS} terms at x = {x}")
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x
        n += 1
    return total


def euler_transform(a: float, b: float, c: float, x: float) -> float:
    """Evaluate 2F1(a, b; c; x) through (1-x)^(c-a-b) 2F1(c-a, c-b; c; x)."""
    if x >= 1.0:
        raise Divergence(f"transform undefined at x = {x}")
    return (1.0 - x) ** (c - a - b) * hyp2f1(c - a, c - b, c, x)


def _compositions(total: int, parts: int):
    """All ordered tuples of ``parts`` non-negative integers summing to total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class PartitionSumReport:
    """Three evaluations of sum_L (#compositions of L into M parts)^2 x^L."""

    m: int
    x: float
    l_max: int
    brute_force: float
    binomial_series: float
    hypergeometric: float
    tail_bound: float
    counts_match: bool

    @property
    def truncated_agree(self) -> float:
        return abs(self.brute_force - self.binomial_series)

    @property
    def hyp_agree(self) -> float:
        return abs(self.binomial_series - self.hypergeometric)


def partition_sum_identity(m: int, x: float, l_max: int) -> PartitionSumReport:
    """Cross-check composition counting against 2F1(M, M; 1; x).

    Route one enumerates every tuple of M non-negative integers with sum
    at most l_max and squares the per-sum counts; route two uses the
    closed-form count binom(L+M-1, M-1); route three sums the full
    hypergeometric series. The first two agree exactly; the third differs
    from the truncations by at most ``tail_bound`` (geometric estimate on
    the neglected terms).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x = {x} outside [0, 1)")
    counts = [0] * (l_max + 1)
    for total in range(l_max + 1):
        counts[total] = sum(1 for _ in _compositions(total, m))
    brute = sum(c * c * x ** total for total, c in enumerate(counts))
    series = sum(comb(total + m - 1, m - 1) ** 2 * x ** total
                 for total in range(l_max + 1))
    hyp = hyp2f1(float(m), float(m), 1.0, x)
    match = all(counts[total] == comb(total + m - 1, m - 1)
                for total in range(l_max + 1))
    head = comb(l_max + m, m - 1) ** 2 * x ** (l_max + 1)
    ratio = x * ((l_max + 1 + m) / (l_max + 2)) ** 2
    tail = head / (1.0 - ratio) if ratio < 1.0 else float("inf")
    return PartitionSumReport(m=m, x=x, l_max=l_max, brute_force=brute,
                              binomial_series=series, hypergeometric=hyp,
                              tail_bound=tail, counts_match=match)
