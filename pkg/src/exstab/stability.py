"""Stability predicates, blocking witnesses, rank totals and Gale-Shapley.

All checkers are O(n^2) scans in lexicographic pair order and return the
lexicographically smallest blocking pair as witness. Two-sided exchange
witnesses list man pairs before woman pairs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

from .errors import ContractError, ParseError
from .instance import Instance, OneSidedInstance, PreferenceInstance

WitnessType = Literal["classic", "man-exchange", "woman-exchange", "member-exchange"]


@dataclass(frozen=True)
class Matching:
    """A perfect matching.

    ``pairing[i]`` is the woman matched to man ``i`` (two-sided) or the partner
    of member ``i`` (one-sided); 0-based.
    """

    kind: Literal["two", "one"]
    pairing: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.pairing)
        object.__setattr__(self, "pairing", p)
        n = len(p)
        if self.kind == "two":
            if n < 1 or sorted(p) != list(range(n)):
                raise ContractError(f"two-sided matching must be a bijection on 0..{n - 1}: {p}")
        elif self.kind == "one":
            if n < 2 or n % 2 or any(not 0 <= x < n for x in p):
                raise ContractError(f"one-sided matching needs even n and entries in range: {p}")
            if any(p[i] == i or p[p[i]] != i for i in range(n)):
                raise ContractError(f"one-sided matching must be a fixed-point-free involution: {p}")
        else:
            raise ContractError(f"unknown matching kind {self.kind!r}")

    @property
    def n(self) -> int:
        return len(self.pairing)

    def __getitem__(self, i: int) -> int:
        return self.pairing[i]

    def inverse(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, j in enumerate(self.pairing):
            inv[j] = i
        return tuple(inv)

    def pairs(self) -> list[tuple[int, int]]:
        if self.kind == "two":
            return list(enumerate(self.pairing))
        return [(i, j) for i, j in enumerate(self.pairing) if i < j]


@dataclass(frozen=True)
class BlockingReport:
    verdict: bool
    witness_type: WitnessType | None = None
    pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.verdict != (self.pair is None):
            raise ContractError("a witness is present iff the verdict is false")

    def __bool__(self) -> bool:
        return self.verdict

    def to_dict(self) -> dict:
        witness = None
        if self.pair is not None:
            witness = {"type": self.witness_type, "pair": [self.pair[0] + 1, self.pair[1] + 1]}
        return {"verdict": self.verdict, "witness": witness}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


STABLE = BlockingReport(True)


@dataclass(frozen=True)
class RankTotals:
    """``R``: sum of ranks held by men (or members) for their partners.

    ``Q``: sum of ranks held by women for their husbands (two-sided only).
    """

    kind: Literal["two", "one"]
    R: int
    Q: int | None = None


def _check_two(inst, m: Matching) -> None:
    if not isinstance(inst, PreferenceInstance) or m.kind != "two":
        raise ContractError("expected a two-sided instance and matching")
    if inst.n != m.n:
        raise ContractError(f"size mismatch: instance n={inst.n}, matching n={m.n}")


def _check_one(inst, m: Matching) -> None:
    if not isinstance(inst, OneSidedInstance) or m.kind != "one":
        raise ContractError("expected a one-sided instance and matching")
    if inst.n != m.n:
        raise ContractError(f"size mismatch: instance n={inst.n}, matching n={m.n}")


def is_exchange_stable_two_sided(inst: PreferenceInstance, m: Matching) -> BlockingReport:
    _check_two(inst, m)
    n = inst.n
    mr = inst.men_rank.tolist()
    wr = inst.women_rank.tolist()
    wife = m.pairing
    for a in range(n):
        for b in range(a + 1, n):
            wa, wb = wife[a], wife[b]
            if mr[a][wb] < mr[a][wa] and mr[b][wa] < mr[b][wb]:
                return BlockingReport(False, "man-exchange", (a, b))
    husband = m.inverse()
    for a in range(n):
        for b in range(a + 1, n):
            ha, hb = husband[a], husband[b]
            if wr[a][hb] < wr[a][ha] and wr[b][ha] < wr[b][hb]:
                return BlockingReport(False, "woman-exchange", (a, b))
    return STABLE


def is_exchange_stable_one_sided(inst: OneSidedInstance, m: Matching) -> BlockingReport:
    """Couples ``(i, M(i))`` are exempt: swapping partners inside a couple changes nothing."""
    _check_one(inst, m)
    n = inst.n
    rk = inst.rank.tolist()
    p = m.pairing
    for a in range(n):
        for b in range(a + 1, n):
            if p[a] == b:
                continue
            if rk[a][p[b]] < rk[a][p[a]] and rk[b][p[a]] < rk[b][p[b]]:
                return BlockingReport(False, "member-exchange", (a, b))
    return STABLE


def is_stable_two_sided(inst: PreferenceInstance, m: Matching) -> BlockingReport:
    _check_two(inst, m)
    n = inst.n
    mr = inst.men_rank.tolist()
    wr = inst.women_rank.tolist()
    wife = m.pairing
    husband = m.inverse()
    for i in range(n):
        for j in range(n):
            if j != wife[i] and mr[i][j] < mr[i][wife[i]] and wr[j][i] < wr[j][husband[j]]:
                return BlockingReport(False, "classic", (i, j))
    return STABLE


def is_stable_one_sided(inst: OneSidedInstance, m: Matching) -> BlockingReport:
    _check_one(inst, m)
    n = inst.n
    rk = inst.rank.tolist()
    p = m.pairing
    for a in range(n):
        for b in range(a + 1, n):
            if p[a] != b and rk[a][b] < rk[a][p[a]] and rk[b][a] < rk[b][p[b]]:
                return BlockingReport(False, "classic", (a, b))
    return STABLE


def is_exchange_stable(inst: Instance, m: Matching) -> BlockingReport:
    if isinstance(inst, PreferenceInstance):
        return is_exchange_stable_two_sided(inst, m)
    return is_exchange_stable_one_sided(inst, m)


def is_stable(inst: Instance, m: Matching) -> BlockingReport:
    if isinstance(inst, PreferenceInstance):
        return is_stable_two_sided(inst, m)
    return is_stable_one_sided(inst, m)


def is_doubly_stable(inst: Instance, m: Matching) -> bool:
    return bool(is_stable(inst, m)) and bool(is_exchange_stable(inst, m))


def rank_totals(inst: Instance, m: Matching) -> RankTotals:
    if isinstance(inst, PreferenceInstance):
        _check_two(inst, m)
        R = sum(int(inst.men_rank[i, j]) for i, j in enumerate(m.pairing))
        Q = sum(int(inst.women_rank[j, i]) for i, j in enumerate(m.pairing))
        return RankTotals("two", R, Q)
    _check_one(inst, m)
    return RankTotals("one", sum(int(inst.rank[i, j]) for i, j in enumerate(m.pairing)))


def gale_shapley(inst: PreferenceInstance, proposing_side: Literal["men", "women"] = "men") -> Matching:
    """Deferred acceptance; optimal for the proposing side."""
    if not isinstance(inst, PreferenceInstance):
        raise ContractError("Gale-Shapley needs a two-sided instance")
    if proposing_side == "men":
        prop_rank, recv_rank = inst.men_rank, inst.women_rank
    elif proposing_side == "women":
        prop_rank, recv_rank = inst.women_rank, inst.men_rank
    else:
        raise ContractError(f"proposing_side must be 'men' or 'women', not {proposing_side!r}")
    n = inst.n
    prefs = [sorted(range(n), key=lambda j, i=i: prop_rank[i, j]) for i in range(n)]
    next_choice = [0] * n
    held: list[int | None] = [None] * n
    free = list(range(n - 1, -1, -1))
    while free:
        i = free.pop()
        j = prefs[i][next_choice[i]]
        next_choice[i] += 1
        current = held[j]
        if current is None:
            held[j] = i
        elif recv_rank[j, i] < recv_rank[j, current]:
            held[j] = i
            free.append(current)
        else:
            free.append(i)
    if proposing_side == "men":
        wife = [0] * n
        for j, i in enumerate(held):
            wife[i] = j
        return Matching("two", tuple(wife))
    return Matching("two", tuple(held))


def write_matching(m: Matching) -> str:
    return f"match {m.kind} {m.n}\n" + " ".join(str(x + 1) for x in m.pairing) + "\n"


def read_matching(text: str) -> Matching:
    """Parse ``match <two|one> <n>`` followed by the n values M(1)..M(n), 1-based."""
    tokens: list[tuple[int, str]] = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = (lineno, line.split())
            continue
        tokens.extend((lineno, tok) for tok in line.split())
    if header is None:
        raise ParseError("empty matching text", 1)
    lineno, parts = header
    if len(parts) != 3 or parts[0] != "match" or parts[1] not in ("two", "one") or not parts[2].isdigit():
        raise ParseError(f"malformed header {' '.join(parts)!r}; expected 'match <two|one> <n>'", lineno)
    kind, n = parts[1], int(parts[2])
    if len(tokens) != n:
        raise ParseError(f"expected {n} entries, found {len(tokens)}", tokens[-1][0] if tokens else lineno)
    values = []
    for ln, tok in tokens:
        if not tok.isdigit() or not 1 <= int(tok) <= n:
            raise ParseError(f"entry {tok!r} out of range 1..{n}", ln)
        values.append(int(tok) - 1)
    try:
        return Matching(kind, tuple(values))
    except ContractError as exc:
        raise ParseError(str(exc), lineno) from None
