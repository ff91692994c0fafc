"""Preference instances: representation, seeded generation, enumeration, text I/O.

Instances store *ranks*: ``men_rank[i, j]`` is the position (1 = best) of
woman ``j`` in man ``i``'s list. Participants are 0-based in the Python API and
1-based in the text format.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import CapExceededError, ContractError, InvalidSizeError, ParseError
from .rng import Seed, as_seed

DEFAULT_ENUMERATION_CAP = 10**6


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def _check_rank_rows(rank: np.ndarray, what: str, skip_diagonal: bool = False) -> None:
    n = rank.shape[0]
    for i in range(n):
        row = [int(rank[i, j]) for j in range(n) if not (skip_diagonal and i == j)]
        if sorted(row) != list(range(1, len(row) + 1)):
            raise ContractError(f"{what} row {i} is not a permutation of ranks: {row}")


@dataclass(frozen=True, eq=False)
class PreferenceInstance:
    """Two-sided (marriage) instance with ``n`` men and ``n`` women."""

    men_rank: np.ndarray
    women_rank: np.ndarray

    def __post_init__(self):
        men, women = _frozen(self.men_rank), _frozen(self.women_rank)
        if men.ndim != 2 or men.shape[0] < 1 or men.shape[0] != men.shape[1]:
            raise InvalidSizeError("men_rank must be a non-empty square array")
        if women.shape != men.shape:
            raise InvalidSizeError("men_rank and women_rank shapes differ")
        _check_rank_rows(men, "men_rank")
        _check_rank_rows(women, "women_rank")
        object.__setattr__(self, "men_rank", men)
        object.__setattr__(self, "women_rank", women)

    side = "two"

    @property
    def n(self) -> int:
        return self.men_rank.shape[0]

    def man_order(self, i: int) -> list[int]:
        """Women in man ``i``'s list, most preferred first."""
        return [int(j) for j in np.argsort(self.men_rank[i], kind="stable")]

    def woman_order(self, j: int) -> list[int]:
        return [int(i) for i in np.argsort(self.women_rank[j], kind="stable")]

    def relabel_men(self, perm) -> "PreferenceInstance":
        """Instance where man ``i`` becomes man ``perm[i]``."""
        perm = np.asarray(perm)
        men = np.empty_like(self.men_rank)
        men[perm] = self.men_rank
        return PreferenceInstance(men, self.women_rank[:, np.argsort(perm)])

    def __eq__(self, other):
        if not isinstance(other, PreferenceInstance):
            return NotImplemented
        return np.array_equal(self.men_rank, other.men_rank) and np.array_equal(
            self.women_rank, other.women_rank
        )

    def __hash__(self):
        return hash((self.men_rank.tobytes(), self.women_rank.tobytes()))


@dataclass(frozen=True, eq=False)
class OneSidedInstance:
    """One-sided (roommates) instance on an even number of members.

    ``rank[i, j]`` is the rank of member ``j`` in member ``i``'s list; the
    diagonal is unused and stored as 0.
    """

    rank: np.ndarray

    def __post_init__(self):
        rank = np.array(self.rank, dtype=np.int64)
        if rank.ndim != 2 or rank.shape[0] != rank.shape[1]:
            raise InvalidSizeError("rank must be a square array")
        n = rank.shape[0]
        if n < 2 or n % 2:
            raise InvalidSizeError(f"one-sided instances need an even n >= 2, got {n}")
        np.fill_diagonal(rank, 0)
        _check_rank_rows(rank, "rank", skip_diagonal=True)
        rank.setflags(write=False)
        object.__setattr__(self, "rank", rank)

    side = "one"

    @property
    def n(self) -> int:
        return self.rank.shape[0]

    def order(self, i: int) -> list[int]:
        return sorted((j for j in range(self.n) if j != i), key=lambda j: self.rank[i, j])

    def relabel(self, perm) -> "OneSidedInstance":
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return OneSidedInstance(self.rank[np.ix_(inv, inv)])

    def __eq__(self, other):
        if not isinstance(other, OneSidedInstance):
            return NotImplemented
        return np.array_equal(self.rank, other.rank)

    def __hash__(self):
        return hash(self.rank.tobytes())


Instance = PreferenceInstance | OneSidedInstance


def _check_two_sided_n(n: int) -> None:
    if n < 1:
        raise InvalidSizeError(f"two-sided instances need n >= 1, got {n}")


def _check_one_sided_n(n: int) -> None:
    if n < 2 or n % 2:
        raise InvalidSizeError(f"one-sided instances need an even n >= 2, got {n}")


def generate_two_sided(n: int, seed: Seed | int) -> PreferenceInstance:
    """Uniformly random two-sided instance, fully determined by ``(n, seed)``."""
    _check_two_sided_n(n)
    men, women = _kernels.gen_two_sided(np.uint64(as_seed(seed).value), n)
    return PreferenceInstance(men, women)


def generate_one_sided(n: int, seed: Seed | int) -> OneSidedInstance:
    _check_one_sided_n(n)
    return OneSidedInstance(_kernels.gen_one_sided(np.uint64(as_seed(seed).value), n))


def _rank_rows(n: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(1, n + 1)))


def _check_cap(required: int, cap: int) -> None:
    if required > cap:
        raise CapExceededError(
            f"exhaustive enumeration needs {required} instances, cap is {cap}",
            required=required,
            cap=cap,
        )


def all_instances_two_sided(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[PreferenceInstance]:
    """Every two-sided instance of size ``n`` once, lexicographic in the rank rows."""
    _check_two_sided_n(n)
    _check_cap(math.factorial(n) ** (2 * n), cap)
    rows = _rank_rows(n)
    for combo in itertools.product(rows, repeat=2 * n):
        yield PreferenceInstance(combo[:n], combo[n:])


def all_instances_one_sided(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[OneSidedInstance]:
    _check_one_sided_n(n)
    _check_cap(math.factorial(n - 1) ** n, cap)
    rows = _rank_rows(n - 1)
    for combo in itertools.product(rows, repeat=n):
        rank = np.zeros((n, n), dtype=np.int64)
        for i, row in enumerate(combo):
            rank[i, [j for j in range(n) if j != i]] = row
        yield OneSidedInstance(rank)


def write_instance(inst: Instance) -> str:
    """Serialize to the text format (1-based preference orders, best first)."""
    lines = [f"{inst.side} {inst.n}"]
    if isinstance(inst, PreferenceInstance):
        for i in range(inst.n):
            lines.append(" ".join(str(j + 1) for j in inst.man_order(i)))
        for j in range(inst.n):
            lines.append(" ".join(str(i + 1) for i in inst.woman_order(j)))
    else:
        for i in range(inst.n):
            lines.append(" ".join(str(j + 1) for j in inst.order(i)))
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def _parse_order(lineno: int, line: str, allowed: list[int]) -> list[int]:
    try:
        order = [int(tok) - 1 for tok in line.split()]
    except ValueError:
        raise ParseError(f"non-integer entry in {line!r}", lineno) from None
    for v in order:
        if v not in allowed:
            raise ParseError(f"index {v + 1} out of range", lineno)
    if sorted(order) != sorted(allowed):
        raise ParseError("row is not a permutation", lineno)
    return order


def read_instance(text: str) -> Instance:
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty instance text", 1)
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] not in ("two", "one") or not parts[1].isdigit():
        raise ParseError(f"malformed header {header!r}; expected 'two <n>' or 'one <n>'", lineno)
    side, n = parts[0], int(parts[1])
    body = lines[1:]
    expected = 2 * n if side == "two" else n
    if side == "two" and n < 1 or side == "one" and (n < 2 or n % 2):
        raise ParseError(f"invalid size {n} for {side}-sided instance", lineno)
    if len(body) != expected:
        last = body[-1][0] if body else lineno
        raise ParseError(f"expected {expected} preference rows, found {len(body)}", last)
    if side == "two":
        men = np.zeros((n, n), dtype=np.int64)
        women = np.zeros((n, n), dtype=np.int64)
        for k, (ln, line) in enumerate(body):
            order = _parse_order(ln, line, list(range(n)))
            target, row = (men, k) if k < n else (women, k - n)
            for p, j in enumerate(order):
                target[row, j] = p + 1
        return PreferenceInstance(men, women)
    rank = np.zeros((n, n), dtype=np.int64)
    for i, (ln, line) in enumerate(body):
        order = _parse_order(ln, line, [j for j in range(n) if j != i])
        for p, j in enumerate(order):
            rank[i, j] = p + 1
    return OneSidedInstance(rank)
