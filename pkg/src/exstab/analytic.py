"""Exact and asymptotic evaluation of matching probabilities and counts.

The central primitive is :func:`cube_integral`, the exact value of

    integral over [0,1]^m of  prod_{(a,b) in P} (1 - x_a x_b)^e_ab  dx

Expanding every factor and integrating monomials term by term gives a finite
sum of products of ``1/(d_i + 1)``, where ``d_i`` is the degree that vertex
``i`` accumulates. Results are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CapExceededError, ContractError
from .stability import Matching

ExactRational = Fraction

DEFAULT_TERM_CAP = 2**24


def term_cap() -> int:
    """Active cap on expansion terms; ``EXSTAB_TERM_CAP`` overrides the default."""
    raw = os.environ.get("EXSTAB_TERM_CAP")
    return int(raw) if raw else DEFAULT_TERM_CAP


@dataclass(frozen=True)
class PairSystem:
    """Vertices ``0..m-1`` and unordered pairs, each with exponent 1 or 2."""

    m: int
    pairs: tuple[tuple[int, int], ...]
    exponents: tuple[int, ...]

    def __post_init__(self):
        pairs = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.pairs)
        exps = tuple(int(e) for e in self.exponents)
        if len(exps) != len(pairs):
            raise ContractError("one exponent per pair is required")
        if len(set(pairs)) != len(pairs):
            raise ContractError("duplicate pairs in pair system")
        for a, b in pairs:
            if a == b or a < 0 or b >= self.m:
                raise ContractError(f"pair {(a, b)} out of range for m={self.m}")
        if any(e not in (1, 2) for e in exps):
            raise ContractError("exponents must be 1 or 2")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def uniform(cls, m: int, pairs: Sequence[tuple[int, int]], e: int = 1) -> "PairSystem":
        return cls(m, tuple(pairs), (e,) * len(pairs))

    @classmethod
    def complete(cls, m: int, e: int = 1) -> "PairSystem":
        return cls.uniform(m, list(itertools.combinations(range(m), 2)), e)

    @classmethod
    def unmatched(cls, matching: Matching, e: int = 1) -> "PairSystem":
        """All pairs ``(a, b)`` with ``b != M(a)`` for a one-sided matching."""
        n = matching.n
        pairs = [(a, b) for a, b in itertools.combinations(range(n), 2) if matching[a] != b]
        return cls.uniform(n, pairs, e)

    def direct_terms(self) -> int:
        return math.prod(e + 1 for e in self.exponents)


def _expansion(e: int) -> list[tuple[int, int]]:
    # (1 - xy)^e = sum_t coef * (xy)^t
    return [(t, (-1) ** t * math.comb(e, t)) for t in range(e + 1)]


def _check_term_cap(ps: PairSystem, cap: int | None) -> None:
    cap = term_cap() if cap is None else cap
    cost = ps.direct_terms()
    if cost > cap:
        raise CapExceededError(
            f"exact integration of {len(ps.pairs)} pairs needs ~{cost} expansion terms, cap is {cap}",
            required=cost,
            cap=cap,
        )


def cube_integral(ps: PairSystem, cap: int | None = None) -> Fraction:
    """Exact integral by a vertex-by-vertex fold over the expansion.

    Vertices are processed in index order. Expanding the pairs ``(v, u)``,
    ``u > v``, completes the degree of ``v``, which is then integrated out
    (factor ``1/(d_v + 1)``). States with equal residual degree vectors are
    merged, so the work is far below the direct term count.
    """
    _check_term_cap(ps, cap)
    m = ps.m
    by_low: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for (a, b), e in zip(ps.pairs, ps.exponents):
        by_low[a].append((b, e))
    # key: degrees of vertices v..m-1; value: exact weight
    states: dict[tuple[int, ...], Fraction] = {(0,) * m: Fraction(1)}
    for v in range(m):
        for u, e in by_low[v]:
            off = u - v
            nxt: dict[tuple[int, ...], Fraction] = {}
            for key, w in states.items():
                for t, coef in _expansion(e):
                    k = list(key)
                    k[0] += t
                    k[off] += t
                    k = tuple(k)
                    nxt[k] = nxt.get(k, 0) + w * coef
            states = nxt
        folded: dict[tuple[int, ...], Fraction] = {}
        for key, w in states.items():
            rest = key[1:]
            folded[rest] = folded.get(rest, 0) + w / (key[0] + 1)
        states = {k: w for k, w in folded.items() if w}
    return Fraction(states.get((), 0))


def cube_integral_direct(ps: PairSystem) -> Fraction:
    """Reference evaluation: walk all ``prod(e+1)`` expansion terms."""
    total_by_degrees: dict[tuple[int, ...], int] = {}
    choices = [_expansion(e) for e in ps.exponents]
    for picks in itertools.product(*choices):
        deg = [0] * ps.m
        coef = 1
        for (a, b), (t, c) in zip(ps.pairs, picks):
            deg[a] += t
            deg[b] += t
            coef *= c
        key = tuple(deg)
        total_by_degrees[key] = total_by_degrees.get(key, 0) + coef
    total = Fraction(0)
    for deg, coef in total_by_degrees.items():
        if coef:
            total += Fraction(coef, math.prod(d + 1 for d in deg))
    return total


def double_factorial(k: int) -> int:
    """``k!! = k (k-2) (k-4) ...``, with ``(-1)!! = 0!! = 1``."""
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def canonical_one_sided_matching(n: int) -> Matching:
    return Matching("one", tuple(i ^ 1 for i in range(n)))


def _one_sided_matching(n: int, matching: Matching | None) -> Matching:
    if n < 2 or n % 2:
        raise ContractError(f"one-sided quantities need an even n >= 2, got {n}")
    if matching is None:
        return canonical_one_sided_matching(n)
    if matching.kind != "one" or matching.n != n:
        raise ContractError("matching does not fit the requested size")
    return matching


def exact_p_estable_two_sided(n: int, cap: int | None = None) -> Fraction:
    """Probability that a fixed matching is exchange-stable (two-sided, size n)."""
    if n < 1:
        raise ContractError("n must be >= 1")
    integral = cube_integral(PairSystem.complete(n), cap)
    return integral * integral


def exact_expected_count_two_sided(n: int, cap: int | None = None) -> Fraction:
    return math.factorial(n) * exact_p_estable_two_sided(n, cap)


def exact_p_estable_one_sided(n: int, matching: Matching | None = None, cap: int | None = None) -> Fraction:
    m = _one_sided_matching(n, matching)
    return cube_integral(PairSystem.unmatched(m, 1), cap)


def exact_expected_count_one_sided(n: int, cap: int | None = None) -> Fraction:
    return double_factorial(n - 1) * exact_p_estable_one_sided(n, cap=cap)


def exact_p_doubly_one_sided(n: int, matching: Matching | None = None, cap: int | None = None) -> Fraction:
    """Squared-factor integral over the unmatched pairs of a one-sided matching.

    This is the product-form value obtained by treating the classic and the
    exchange block of each pair as independent given the partner ranks. The
    two kinds of block share preference variables and are positively
    correlated, so the true doubly stable probability is at least this value
    (at n=4 it is 161/648 against 34513/180000).
    """
    m = _one_sided_matching(n, matching)
    return cube_integral(PairSystem.unmatched(m, 2), cap)


def asymptotic_expected_two_sided(n: int) -> float:
    return math.sqrt(math.pi * n / 2)


def asymptotic_expected_one_sided(n: int) -> float:
    return math.exp(0.5)


@dataclass(frozen=True)
class RateFunctionPoint:
    xi: float
    H: float
    phi: float
    k: float | None = None


def _check_unit_interval(xi: float) -> None:
    if not 0.0 < xi < 1.0:
        raise ContractError(f"xi must lie in (0, 1), got {xi}")


def rate_H(xi: float) -> float:
    _check_unit_interval(xi)
    s = math.sqrt(1 - 2 * xi + 5 * xi * xi)
    return (
        -(1 - xi) * math.log1p(-xi)
        + 4 * xi * math.log((1 + xi + s) / (1 - xi + s))
        - (1 + xi) * math.log((1 + 3 * xi * xi + (xi + 1) * s) / (1 - xi + s))
    )


def phi(xi: float) -> float:
    """Scaled stationary point: ``k(nu) = n * phi(nu / n)``.

    Positive root of ``k^2 + (n - nu) k - nu^2 = 0`` divided by ``n``.
    """
    _check_unit_interval(xi)
    return 2 * xi * xi / (1 - xi + math.sqrt((1 - xi) ** 2 + 4 * xi * xi))


def stationary_k(n: int, nu: int) -> float:
    return n * phi(nu / n)


def stationarity_ratio(n: int, nu: int, k: float | None = None) -> float:
    """``(nu + k)^2 / (k (n + nu + 2k))``; equals 1 at the stationary point."""
    if k is None:
        k = stationary_k(n, nu)
    return (nu + k) ** 2 / (k * (n + nu + 2 * k))


def rate_function(xi: float, n: int | None = None, nu: int | None = None) -> RateFunctionPoint:
    k = stationary_k(n, nu) if n is not None and nu is not None else None
    return RateFunctionPoint(xi, rate_H(xi), phi(xi), k)


def maximize_rate_function(xatol: float = 1e-10) -> tuple[float, float]:
    """Return ``(xi_max, H(xi_max))`` by bounded derivative-free search on (0, 1)."""
    res = minimize_scalar(
        lambda x: -rate_H(x), bounds=(1e-12, 1 - 1e-12), method="bounded", options={"xatol": xatol}
    )
    return float(res.x), float(-res.fun)


def count_derangements(nu: int) -> int:
    if nu < 0:
        raise ContractError("nu must be >= 0")
    a, b = 1, 0  # pi(0), pi(1)
    if nu == 0:
        return a
    for k in range(2, nu + 1):
        a, b = b, (k - 1) * (a + b)
    return b


def count_B(nu: int) -> int:
    """Ordered pairs of perfect matchings of K_{nu,nu} sharing no edge."""
    return math.factorial(nu) * count_derangements(nu)


def count_B2(n: int, nu: int) -> int:
    """Ordered pairs of matchings of size n that differ on exactly nu men."""
    if not 0 <= nu <= n:
        raise ContractError(f"need 0 <= nu <= n, got nu={nu}, n={n}")
    return math.comb(n, nu) ** 2 * math.factorial(n - nu) * count_B(nu)


def count_even_cycle_perms(nu: int) -> int:
    """Permutations of [nu] whose cycles all have even length >= 4."""
    if nu < 0:
        raise ContractError("nu must be >= 0")
    table = [1] + [0] * nu
    for v in range(1, nu + 1):
        total = 0
        # the cycle through element v has length j; (v-1)!/(v-j)! ways to fill it
        for j in range(4, v + 1, 2):
            total += math.perm(v - 1, j - 1) * table[v - j]
        table[v] = total
    return table[nu]


def count_B2_one_sided(n: int, nu: int) -> int:
    """Ordered pairs of one-sided matchings on [n] whose symmetric difference covers nu members."""
    if not 0 <= nu <= n or n % 2:
        raise ContractError(f"need even n and 0 <= nu <= n, got nu={nu}, n={n}")
    return math.comb(n, nu) * double_factorial(n - nu - 1) * count_even_cycle_perms(nu)


def even_cycle_egf_coefficients(nmax: int) -> list[Fraction]:
    """Coefficients of exp(sum_{even j >= 4} x^j / j) up to x^nmax.

    Uses the power-series exponential recurrence ``n c_n = sum_k k a_k c_{n-k}``.
    """
    a = [Fraction(0)] * (nmax + 1)
    for j in range(4, nmax + 1, 2):
        a[j] = Fraction(1, j)
    c = [Fraction(1)] + [Fraction(0)] * nmax
    for m in range(1, nmax + 1):
        c[m] = sum((k * a[k] * c[m - k] for k in range(1, m + 1)), Fraction(0)) / m
    return c


def second_moment_lower_bound(n: int, side: Literal["two", "one"] = "two") -> float:
    """Natural log of the exponential lower bound on the second factorial moment.

    Two-sided: ``1.5 log n + n H_max``; one-sided: ``1.5 log n + (n/2) H_max``.
    Valid up to an unspecified multiplicative constant.
    """
    if n < 4:
        raise ContractError("the lower bound is stated for n >= 4")
    _, h_max = maximize_rate_function()
    scale = {"two": 1.0, "one": 0.5}[side]
    return 1.5 * math.log(n) + scale * n * h_max


def monte_carlo_integral(ps: PairSystem, samples: int, seed: int, chunk: int = 200_000) -> tuple[float, float]:
    """Plain Monte Carlo estimate of the cube integral and its standard error."""
    if samples < 1:
        raise ContractError("samples must be >= 1")
    if not ps.pairs:
        return 1.0, 0.0
    rng = np.random.default_rng(seed)
    a = np.array([p[0] for p in ps.pairs])
    b = np.array([p[1] for p in ps.pairs])
    e = np.array(ps.exponents)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        x = rng.random((size, ps.m))
        vals = np.prod((1.0 - x[:, a] * x[:, b]) ** e, axis=1)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += size
    mean = total / samples
    if samples == 1:
        return mean, 0.0
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)
