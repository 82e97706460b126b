"""Lazy oriented-percolation environment on Z^d.

The i.i.d. open/closed edge field is never stored: each edge's state is a
keyed hash of (env_seed, translated tail coordinates, direction), so the
infinite environment is deterministic, replayable and translates exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from .errors import BudgetExceededError
from .rngtools import M64, hash_words

PATH_ENUM_BUDGET = 10_000_000


def p_threshold(p: float) -> int:
    """64-bit acceptance threshold: edge open iff hash < threshold."""
    return int(p * 2.0 ** 64)


@dataclass(frozen=True)
class ModelParams:
    """The (d, p, lam) triple indexing every experiment."""

    d: int
    p: float
    lam: Optional[float] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"open probability must lie in (0,1), got {self.p}")
        if self.lam is not None and self.lam <= 0.0:
            raise ValueError(f"infection rate must be positive, got {self.lam}")


@dataclass(frozen=True)
class DirectedEdge:
    """Forward edge from `tail` in unit direction `direction` (1-based)."""

    tail: tuple
    direction: int


@dataclass(frozen=True)
class QuenchedEnvironment:
    """One realization of the edge field, addressed lazily.

    `origin_offset` implements the lattice translation T_x: all queries are
    shifted by the offset before hashing, so translating is O(1) and exact.
    `forced` (None normally) overrides every edge to open/closed; it exists
    for test doubles and degenerate-limit checks only.
    """

    params: ModelParams
    env_seed: int
    origin_offset: tuple = None
    forced: Optional[bool] = None

    def __post_init__(self):
        if self.origin_offset is None:
            object.__setattr__(self, "origin_offset", (0,) * self.params.d)
        if len(self.origin_offset) != self.params.d:
            raise ValueError("origin_offset dimension mismatch")

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.params.d,
                "p": self.params.p,
                "env_seed": self.env_seed,
                "origin_offset": list(self.origin_offset),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QuenchedEnvironment":
        obj = json.loads(text)
        return cls(
            params=ModelParams(d=obj["d"], p=obj["p"]),
            env_seed=obj["env_seed"],
            origin_offset=tuple(obj["origin_offset"]),
        )


def edge_state(env: QuenchedEnvironment, edge: DirectedEdge) -> bool:
    """Whether the oriented edge is open in this realization."""
    d = env.params.d
    if len(edge.tail) != d:
        raise ValueError(f"edge tail has dimension {len(edge.tail)}, expected {d}")
    if not 1 <= edge.direction <= d:
        raise ValueError(f"direction must be in [1, {d}], got {edge.direction}")
    if env.forced is not None:
        return env.forced
    words = [c + o for c, o in zip(edge.tail, env.origin_offset)]
    words.append(edge.direction)
    return hash_words(env.env_seed, words) < p_threshold(env.params.p)


def edge_state_bulk(env: QuenchedEnvironment, tails: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Vectorized edge_state for an (n, d) array of tails and length-n directions."""
    if env.forced is not None:
        return np.full(len(directions), env.forced, dtype=bool)
    tails = np.asarray(tails, dtype=np.int64) + np.asarray(env.origin_offset, dtype=np.int64)
    h = np.full(len(directions), env.env_seed, dtype=np.uint64)
    for j in range(env.params.d):
        h = _mix64_vec(h ^ tails[:, j].astype(np.uint64))
    h = _mix64_vec(h ^ np.asarray(directions, dtype=np.uint64))
    return h < np.uint64(min(p_threshold(env.params.p), M64))


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def translate(env: QuenchedEnvironment, x: Iterable[int]) -> QuenchedEnvironment:
    """Environment seen from x: edge_state(translate(env, x), e) == edge_state(env, x + e)."""
    x = tuple(x)
    if len(x) != env.params.d:
        raise ValueError("translation vector dimension mismatch")
    return replace(env, origin_offset=tuple(o + c for o, c in zip(env.origin_offset, x)))


def open_in_neighbors(env: QuenchedEnvironment, x) -> set:
    """{y : y -> x open}, i.e. the open in-edges x - e_i -> x."""
    x = tuple(x)
    out = set()
    for i in range(1, env.params.d + 1):
        y = tuple(c - (1 if j == i - 1 else 0) for j, c in enumerate(x))
        if edge_state(env, DirectedEdge(y, i)):
            out.add(y)
    return out


def open_out_neighbors(env: QuenchedEnvironment, x) -> set:
    """{y : x -> y open}, i.e. the open out-edges x -> x + e_i."""
    x = tuple(x)
    out = set()
    for i in range(1, env.params.d + 1):
        if edge_state(env, DirectedEdge(x, i)):
            out.add(tuple(c + (1 if j == i - 1 else 0) for j, c in enumerate(x)))
    return out


def count_open_paths_to_origin(env: QuenchedEnvironment, n: int) -> int:
    """Exact number of fully-open oriented paths of length n ending at the origin.

    Length 0 counts the empty path (convention l_0 = 1).  Enumeration is
    memoized on (vertex, remaining steps); the raw path space d^n is guarded
    by PATH_ENUM_BUDGET.
    """
    if n < 0:
        raise ValueError("path length must be nonnegative")
    d = env.params.d
    if d ** n > PATH_ENUM_BUDGET:
        raise BudgetExceededError(f"d^n = {d}^{n} exceeds enumeration budget {PATH_ENUM_BUDGET}")
    origin = (0,) * d
    memo = {}

    def count_from(x, k):
        if k == 0:
            return 1
        key = (x, k)
        if key in memo:
            return memo[key]
        total = 0
        for i in range(1, d + 1):
            y = tuple(c - (1 if j == i - 1 else 0) for j, c in enumerate(x))
            if edge_state(env, DirectedEdge(y, i)):
                total += count_from(y, k - 1)
        memo[key] = total
        return total

    return count_from(origin, n)
