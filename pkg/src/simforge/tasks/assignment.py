"""Antenna-to-user pairing: exhaustive search over injective maps and a greedy heuristic."""

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from ..errors import InvalidParameter, TooLarge

EXHAUSTIVE_LIMIT = 10**6


@dataclass(frozen=True)
class AssignmentProblem:
    """Nonnegative antenna-by-user affinity matrix, M antennas >= K users."""

    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 2:
            raise InvalidParameter("gains must be a 2-D matrix")
        m, k = g.shape
        if k < 1 or m < k:
            raise InvalidParameter("need M >= K >= 1")
        if np.any(g < 0):
            raise InvalidParameter("gains must be nonnegative")
        object.__setattr__(self, "gains", g)

    @property
    def num_antennas(self):
        return self.gains.shape[0]

    @property
    def num_users(self):
        return self.gains.shape[1]


def assignment_count(m, k):
    """Number of injective user->antenna maps: M! / (M-K)!."""
    if k < 0 or m < 0:
        raise InvalidParameter("M and K must be nonnegative")
    if k > m:
        raise InvalidParameter("K may not exceed M")
    return math.factorial(m) // math.factorial(m - k)


def assign_antennas(problem, method):
    """Pick one antenna per user maximizing the summed gain.

    exhaustive enumerates every injective map (guarded by the P(M,K) size
    limit; first optimum in lexicographic antenna-tuple order on ties).
    greedy repeatedly takes the largest remaining (antenna, user) pair,
    ties to the lexicographically smallest pair.
    Returns (assignment, objective) with assignment[user] = antenna.
    """
    g = problem.gains
    m, k = g.shape
    if method == "exhaustive":
        if assignment_count(m, k) > EXHAUSTIVE_LIMIT:
            raise TooLarge(f"P({m},{k}) exceeds the exhaustive limit {EXHAUSTIVE_LIMIT}")
        best_obj = -np.inf
        best = None
        users = np.arange(k)
        for perm in permutations(range(m), k):
            obj = float(g[list(perm), users].sum())
            if obj > best_obj:
                best_obj = obj
                best = np.asarray(perm, dtype=int)
        return best, best_obj
    if method == "greedy":
        avail = g.copy()
        assign = np.full(k, -1, dtype=int)
        for _ in range(k):
            a, u = np.unravel_index(np.argmax(avail), avail.shape)
            assign[u] = a
            avail[a, :] = -np.inf
            avail[:, u] = -np.inf
        return assign, float(g[assign, np.arange(k)].sum())
    raise InvalidParameter(f"unknown method {method!r}")
