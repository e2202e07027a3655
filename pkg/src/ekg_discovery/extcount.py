"""Budgeted lower/upper bounds on linear-extension counts, in log2 space.

The recursion splits a poset into independent blocks (binomial interleaving
factor) or branches on its minimal elements (sum over removals).  When the
budget runs out a sub-poset falls back to the naive interval ``[1, n!]``.
Iterative deepening reruns the recursion with a doubling depth limit and
keeps the intersection of all intervals seen.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from typing import Sequence

from .poset import Poset, _bits, component_masks

_LF_CACHE_LIMIT = 8192
_log2_fact: list[float] = [0.0]
_fact_last = 1


def log2_factorial(n: int) -> float:
    global _fact_last
    if n < 0:
        raise ValueError("factorial of a negative number")
    if n < len(_log2_fact):
        return _log2_fact[n]
    if n > _LF_CACHE_LIMIT:
        return math.log2(math.factorial(n))
    f = _fact_last
    for i in range(len(_log2_fact), n + 1):
        f *= i
        _log2_fact.append(math.log2(f))
    _fact_last = f
    return _log2_fact[n]


def log_choose(n: int, k: int) -> float:
    """log2 of the binomial coefficient C(n, k)."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"log_choose needs 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if n <= _LF_CACHE_LIMIT:
        return log2_factorial(n) - log2_factorial(k) - log2_factorial(n - k)
    return math.log2(math.comb(n, k))


def log_sum_exp2(values: Sequence[float]) -> float:
    """log2(sum(2**v)), shifted by the maximum for stability."""
    if not values:
        raise ValueError("log_sum_exp2 of an empty sequence")
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log2(math.fsum(2.0 ** (v - m) for v in values))


@dataclass(frozen=True)
class BoundedCount:
    log2_lower: float
    log2_upper: float
    exact: bool = False

    def __post_init__(self):
        if not 0.0 <= self.log2_lower <= self.log2_upper:
            raise ValueError(f"invalid bounds [{self.log2_lower}, {self.log2_upper}]")

    @property
    def width(self) -> float:
        return self.log2_upper - self.log2_lower


@dataclass(frozen=True)
class Budget:
    """Counting budget.  ``None`` means no limit on that axis.

    ``max_calls`` caps recursive calls and gives wall-clock independent,
    reproducible results.
    """
    deadline_ms: float | None = None
    max_depth: int | None = None
    max_calls: int | None = None

    @classmethod
    def unbounded(cls) -> Budget:
        return cls()

    @property
    def is_unbounded(self) -> bool:
        return self.deadline_ms is None and self.max_depth is None and self.max_calls is None

    def scaled(self, factor: float) -> Budget:
        return Budget(
            None if self.deadline_ms is None else self.deadline_ms * factor,
            None if self.max_depth is None else max(1, int(math.ceil(self.max_depth * factor))),
            None if self.max_calls is None else max(1, int(math.ceil(self.max_calls * factor))),
        )


class _Bounder:
    def __init__(self, p: Poset, budget: Budget):
        self.p = p
        self.pred = p.pred_masks
        self.budget = budget
        self.memo: dict[int, tuple[float, float, bool]] = {}
        self.calls = 0
        self.start = time.perf_counter()
        self.depth_limit: int | None = None
        self.depth_cut = False
        self.resource_cut = False

    def _stop(self, depth: int) -> bool:
        b = self.budget
        if b.max_calls is not None and self.calls > b.max_calls:
            self.resource_cut = True
            return True
        if b.deadline_ms is not None and (time.perf_counter() - self.start) * 1000.0 >= b.deadline_ms:
            self.resource_cut = True
            return True
        if self.depth_limit is not None and depth >= self.depth_limit:
            self.depth_cut = True
            return True
        return False

    def bound(self, mask: int, depth: int) -> tuple[float, float, bool]:
        self.calls += 1
        entry = mask
        stop_checked = False
        while True:
            size = mask.bit_count()
            if size <= 1:
                res = (0.0, 0.0, True)
                break
            hit = self.memo.get(mask)
            if hit is not None:
                res = hit
                break
            comps = component_masks(self.p, mask)
            free = 0
            for c in comps:
                if c & (c - 1) == 0:
                    free |= c
            if free == mask:
                v = log2_factorial(size)
                res = (v, v, True)
                break
            if not stop_checked:
                stop_checked = True
                if self._stop(depth):
                    return (0.0, log2_factorial(size), False)
            if len(comps) == 1:
                mins = [x for x in _bits(mask) if self.pred[x] & mask == 0]
                if len(mins) == 1:
                    # a unique minimum contributes a factor of one
                    mask ^= 1 << mins[0]
                    continue
                parts = [self.bound(mask ^ (1 << x), depth + 1) for x in mins]
                res = (log_sum_exp2([q[0] for q in parts]),
                       log_sum_exp2([q[1] for q in parts]),
                       all(q[2] for q in parts))
            else:
                if free:
                    k = free.bit_count()
                    v = log2_factorial(k)
                    l1, u1, e1 = v, v, True
                    l2, u2, e2 = self.bound(mask & ~free, depth + 1)
                else:
                    h = min(comps, key=lambda c: (c.bit_count(), c & -c))
                    k = h.bit_count()
                    l1, u1, e1 = self.bound(h, depth + 1)
                    l2, u2, e2 = self.bound(mask & ~h, depth + 1)
                c = log_choose(size, k)
                res = (c + l1 + l2, c + u1 + u2, e1 and e2)
            break
        if res[2]:
            self.memo[mask] = res
            self.memo[entry] = res
        return res


def bound_extensions(p: Poset, budget: Budget = Budget()) -> BoundedCount:
    """Bound the number of linear extensions of ``p`` within ``budget``."""
    n = p.n
    top = log2_factorial(n)
    if sys.getrecursionlimit() < 4 * n + 200:
        sys.setrecursionlimit(4 * n + 200)
    full = (1 << n) - 1
    b = _Bounder(p, budget)
    if budget.deadline_ms is None and budget.max_calls is None and budget.max_depth is None:
        lo, hi, exact = b.bound(full, 0)
        return _finish(lo, hi, exact, top)

    best_lo, best_hi, exact = 0.0, top, False
    limit = 1
    while True:
        if budget.max_depth is not None:
            limit = min(limit, budget.max_depth)
        b.depth_limit = limit
        b.depth_cut = False
        lo, hi, ex = b.bound(full, 0)
        best_lo, best_hi = max(best_lo, lo), min(best_hi, hi)
        if ex:
            return _finish(lo, hi, True, top)
        if b.resource_cut or not b.depth_cut:
            break
        if budget.max_depth is not None and limit >= budget.max_depth:
            break
        limit *= 2
    return _finish(best_lo, best_hi, exact, top)


def _finish(lo: float, hi: float, exact: bool, top: float) -> BoundedCount:
    # float rounding can push results a hair outside the naive envelope
    lo = min(max(0.0, lo), top)
    hi = lo if exact else max(0.0, min(top, hi))
    if lo > hi:
        lo = hi
    return BoundedCount(lo, hi, exact)
