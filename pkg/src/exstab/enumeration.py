"""Exhaustive enumeration of e-stable, stable and doubly stable matchings.

``enumerate_pruned`` runs the compiled backtracking search, abandoning a
partial matching as soon as two already-matched participants block it.
``enumerate_naive`` walks the same search tree without pruning and filters
complete matchings with the checkers in :mod:`exstab.stability`; it is the
oracle for the pruned search.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _kernels
from .errors import CapExceededError, ContractError
from .instance import Instance, OneSidedInstance, PreferenceInstance
from .stability import Matching, is_exchange_stable, is_stable

Kind = Literal["e-stable", "stable", "doubly"]

_ALIASES = {
    "e-stable": "e-stable",
    "estable": "e-stable",
    "exchange": "e-stable",
    "stable": "stable",
    "classic": "stable",
    "doubly": "doubly",
    "doubly-stable": "doubly",
}

NAIVE_MAX_N = {"two": 8, "one": 10}


def normalize_kind(kind: str) -> Kind:
    try:
        return _ALIASES[kind]  # type: ignore[return-value]
    except KeyError:
        raise ContractError(f"unknown kind {kind!r}; expected one of e-stable, stable, doubly") from None


@dataclass(frozen=True)
class EnumerationResult:
    count: int
    kind: Kind
    side: Literal["two", "one"]
    nodes_visited: int
    matchings: list[Matching] | None = field(default=None, compare=False)

    def matching_set(self) -> set[tuple[int, ...]]:
        if self.matchings is None:
            raise ContractError("matchings were not retained")
        return {m.pairing for m in self.matchings}


def _flags(kind: Kind) -> tuple[bool, bool]:
    return kind in ("e-stable", "doubly"), kind in ("stable", "doubly")


def enumerate_pruned(inst: Instance, kind: str, retain: bool = False, stop_after: int = 0) -> EnumerationResult:
    """All matchings of ``inst`` of the given kind, in lexicographic order.

    Set ``stop_after`` to end the search early once that many matchings are
    found (used for existence queries).
    """
    kind = normalize_kind(kind)
    exchange, classic = _flags(kind)
    n = inst.n
    empty = np.empty((0, n), dtype=np.int64)
    if isinstance(inst, PreferenceInstance):
        run = lambda out: _kernels.enumerate_two_sided(  # noqa: E731
            inst.men_rank, inst.women_rank, exchange, classic, out, stop_after
        )
        side = "two"
    elif isinstance(inst, OneSidedInstance):
        run = lambda out: _kernels.enumerate_one_sided(inst.rank, exchange, classic, out, stop_after)  # noqa: E731
        side = "one"
    else:
        raise ContractError(f"not an instance: {type(inst).__name__}")
    count, nodes = run(empty)
    matchings = None
    if retain:
        out = np.empty((count, n), dtype=np.int64)
        run(out)
        matchings = [Matching(side, tuple(row)) for row in out.tolist()]
    return EnumerationResult(int(count), kind, side, int(nodes), matchings)


def _walk_two_sided(n: int):
    """Yield every bijection in lexicographic order; also return the node count."""
    wife: list[int] = []
    used = [False] * n
    nodes = 0
    found: list[tuple[int, ...]] = []

    def rec():
        nonlocal nodes
        if len(wife) == n:
            found.append(tuple(wife))
            return
        for w in range(n):
            if not used[w]:
                nodes += 1
                used[w] = True
                wife.append(w)
                rec()
                wife.pop()
                used[w] = False

    rec()
    return found, nodes


def _walk_one_sided(n: int):
    partner = [-1] * n
    nodes = 0
    found: list[tuple[int, ...]] = []

    def rec():
        nonlocal nodes
        try:
            a = partner.index(-1)
        except ValueError:
            found.append(tuple(partner))
            return
        for b in range(a + 1, n):
            if partner[b] < 0:
                nodes += 1
                partner[a], partner[b] = b, a
                rec()
                partner[a] = partner[b] = -1

    rec()
    return found, nodes


def enumerate_naive(inst: Instance, kind: str, retain: bool = True) -> EnumerationResult:
    kind = normalize_kind(kind)
    side = inst.side
    if inst.n > NAIVE_MAX_N[side]:
        raise CapExceededError(
            f"naive enumeration is limited to n <= {NAIVE_MAX_N[side]} for {side}-sided instances",
            required=inst.n,
            cap=NAIVE_MAX_N[side],
        )
    walk = _walk_two_sided if side == "two" else _walk_one_sided
    candidates, nodes = walk(inst.n)
    keep = []
    for pairing in candidates:
        m = Matching(side, pairing)
        ok = True
        if kind in ("e-stable", "doubly"):
            ok = bool(is_exchange_stable(inst, m))
        if ok and kind in ("stable", "doubly"):
            ok = bool(is_stable(inst, m))
        if ok:
            keep.append(m)
    return EnumerationResult(len(keep), kind, side, nodes, keep if retain else None)


def count_doubly_stable(inst: Instance, retain: bool = False) -> EnumerationResult:
    """Doubly stable matchings as the stable set filtered by exchange-stability.

    The stable set is nearly always the smaller of the two, so it is
    enumerated and then filtered.
    """
    stable = enumerate_pruned(inst, "stable", retain=True)
    keep = [m for m in stable.matchings if is_exchange_stable(inst, m)]
    return EnumerationResult(len(keep), "doubly", stable.side, stable.nodes_visited, keep if retain else None)


def enumerate_naive_all(inst: Instance) -> dict[str, EnumerationResult]:
    """``enumerate_naive`` for all three kinds, checking each matching once."""
    side = inst.side
    if inst.n > NAIVE_MAX_N[side]:
        raise CapExceededError(
            f"naive enumeration is limited to n <= {NAIVE_MAX_N[side]} for {side}-sided instances",
            required=inst.n,
            cap=NAIVE_MAX_N[side],
        )
    walk = _walk_two_sided if side == "two" else _walk_one_sided
    candidates, nodes = walk(inst.n)
    found: dict[str, list[Matching]] = {"e-stable": [], "stable": [], "doubly": []}
    for pairing in candidates:
        m = Matching(side, pairing)
        e = bool(is_exchange_stable(inst, m))
        s = bool(is_stable(inst, m))
        if e:
            found["e-stable"].append(m)
        if s:
            found["stable"].append(m)
        if e and s:
            found["doubly"].append(m)
    return {k: EnumerationResult(len(v), k, side, nodes, v) for k, v in found.items()}  # type: ignore[arg-type]
