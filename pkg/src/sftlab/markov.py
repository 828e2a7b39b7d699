"""Ergodic Markov measures on subshifts of finite type.

Stationary vectors, exact cylinder probabilities, the reverse kernel for
backward sampling, spectral data (period, mixing rate), entropy rate in nats,
and stationary path sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np

from .shiftspace import Cylinder, SftSystem, Word, system_preset

_ATOL = 1e-12


class MarkovMeasureError(ValueError):
    """Invalid transition data: non-stochastic rows, reducibility, support mismatch."""


def _strongly_connected(positive: np.ndarray) -> bool:
    n = positive.shape[0]
    for graph in (positive, positive.T):
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in np.nonzero(graph[u])[0]:
                if v not in seen:
                    seen.add(int(v))
                    stack.append(int(v))
        if len(seen) != n:
            return False
    return True


def stationary_distribution(transition: Sequence[Sequence[float]]) -> np.ndarray:
    """Unique probability vector pi with pi P = pi for an irreducible stochastic P.

    Raises MarkovMeasureError for non-stochastic rows or a reducible matrix.
    Solved as a least-squares system; the residual is checked against 1e-12.
    """
    P = np.asarray(transition, dtype=float)
    n = P.shape[0]
    if P.shape != (n, n):
        raise MarkovMeasureError("transition matrix must be square")
    if np.any(P < -_ATOL):
        raise MarkovMeasureError("transition probabilities must be nonnegative")
    rows = P.sum(axis=1)
    bad = np.nonzero(np.abs(rows - 1.0) > 1e-9)[0]
    if bad.size:
        raise MarkovMeasureError("row %d sums to %.12g, expected 1" % (bad[0], rows[bad[0]]))
    if not _strongly_connected(P > 0):
        raise MarkovMeasureError("transition matrix is reducible")
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ P - pi)) > _ATOL:
        raise MarkovMeasureError("stationary solve residual exceeds 1e-12")
    return pi


@dataclass(frozen=True)
class SpectralInfo:
    """Period and mixing rate of an irreducible stochastic matrix.

    second_modulus is the largest eigenvalue modulus strictly inside the unit
    circle (0 for rank-one and deterministic-cycle chains); the unit-modulus
    eigenvalues are exactly the period-th roots of unity.
    """

    is_primitive: bool
    period: int
    second_modulus: float

    def __post_init__(self) -> None:
        if (self.period == 1) != self.is_primitive:
            raise MarkovMeasureError("period must be 1 exactly for primitive chains")


class MarkovMeasure:
    """Shift-invariant Markov measure on an SFT.

    Parameters
    ----------
    system : SftSystem
        The ambient subshift; transition support must respect adjacency.
    transition : array_like
        Row-stochastic matrix of conditional probabilities P(a -> b).
    strict : bool
        When True, additionally require transition(a,b) > 0 wherever
        adjacency(a,b) = 1, so the measure has full topological support.
    """

    def __init__(self, system: SftSystem, transition: Sequence[Sequence[float]],
                 strict: bool = False):
        P = np.asarray(transition, dtype=float)
        if P.shape != (system.alphabet_size, system.alphabet_size):
            raise MarkovMeasureError("transition shape does not match the alphabet")
        pi = stationary_distribution(P)
        adj = np.asarray(system.adjacency)
        if np.any((P > 0) & (adj == 0)):
            raise MarkovMeasureError("positive transition on a forbidden word")
        if strict and np.any((adj == 1) & (P <= 0)):
            raise MarkovMeasureError("strict support: adjacency-allowed word has probability 0")
        P = P.copy()
        P.setflags(write=False)
        pi.setflags(write=False)
        self.system = system
        self.transition = P
        self.stationary = pi
        self.strict = strict
        self._powers: dict[int, np.ndarray] = {1: P}
        self._reverse: np.ndarray | None = None
        self._cum_fwd = np.cumsum(P, axis=1)
        self._spectral: SpectralInfo | None = None

    # -- basic structure -------------------------------------------------

    @property
    def alphabet_size(self) -> int:
        return self.system.alphabet_size

    def positive_successors(self, a: int) -> tuple[int, ...]:
        return tuple(int(b) for b in np.nonzero(self.transition[a] > 0)[0])

    def positive_predecessors(self, b: int) -> tuple[int, ...]:
        return tuple(int(a) for a in np.nonzero(self.transition[:, b] > 0)[0])

    def step_matrix(self, g: int) -> np.ndarray:
        """g-step transition matrix P^g (cached)."""
        if g < 0:
            raise MarkovMeasureError("step count must be >= 0")
        got = self._powers.get(g)
        if got is None:
            got = np.linalg.matrix_power(self.transition, g)
            got.setflags(write=False)
            self._powers[g] = got
        return got

    # -- cylinders --------------------------------------------------------

    def word_prob(self, word: Sequence[int]) -> float:
        """Stationary probability of observing ``word`` at any fixed position."""
        w = tuple(int(s) for s in word)
        if not w:
            return 1.0
        self.system.check_symbols(w)
        p = float(self.stationary[w[0]])
        for a, b in zip(w, w[1:]):
            p *= float(self.transition[a, b])
            if p == 0.0:
                return 0.0
        return p

    def cylinder_prob(self, c: Cylinder | Sequence[int]) -> float:
        """Measure of a cylinder; position-independent by stationarity.

        A disallowed word simply has probability 0.
        """
        word = c.word if isinstance(c, Cylinder) else c
        return self.word_prob(word)

    # -- reversal ----------------------------------------------------------

    def reverse_kernel(self) -> np.ndarray:
        """Backward kernel R(b, a) = pi(a) P(a, b) / pi(b); row-stochastic.

        The reversed chain is again stationary for pi and has the same
        entropy rate.
        """
        if self._reverse is None:
            pi = self.stationary
            R = (self.transition.T * pi[None, :]) / pi[:, None]
            R.setflags(write=False)
            self._reverse = R
        return self._reverse

    def reversed_measure(self) -> "MarkovMeasure":
        rev_adj = tuple(tuple(row) for row in np.asarray(self.system.adjacency).T.tolist())
        return MarkovMeasure(SftSystem(self.alphabet_size, rev_adj), self.reverse_kernel(),
                             strict=self.strict)

    # -- entropy and spectrum ----------------------------------------------

    def entropy_rate(self) -> float:
        """Entropy rate -sum_ij pi_i P_ij ln P_ij, in nats."""
        P = self.transition
        pi = self.stationary
        mask = P > 0
        return float(-(pi[:, None] * np.where(mask, P * np.log(np.where(mask, P, 1.0)), 0.0)).sum())

    def spectral_info(self) -> SpectralInfo:
        if self._spectral is None:
            period = self._period()
            eigs = np.abs(np.linalg.eigvals(self.transition))
            inside = eigs[eigs < 1.0 - 1e-9]
            second = float(inside.max()) if inside.size else 0.0
            self._spectral = SpectralInfo(is_primitive=(period == 1), period=period,
                                          second_modulus=second)
        return self._spectral

    def _period(self) -> int:
        # gcd of (level[u] + 1 - level[v]) over positive edges, levels from BFS
        P = self.transition
        n = self.alphabet_size
        level = [-1] * n
        level[0] = 0
        queue = [0]
        while queue:
            u = queue.pop(0)
            for v in np.nonzero(P[u] > 0)[0]:
                v = int(v)
                if level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        g = 0
        for u in range(n):
            for v in np.nonzero(P[u] > 0)[0]:
                g = gcd(g, level[u] + 1 - level[int(v)])
        return abs(g) if g else 1

    def cyclic_classes(self) -> tuple[int, ...]:
        """Map symbol -> cyclic class index (all zeros for primitive chains)."""
        p = self.spectral_info().period
        P = self.transition
        n = self.alphabet_size
        level = [0] * n
        seen = [False] * n
        seen[0] = True
        queue = [0]
        while queue:
            u = queue.pop(0)
            for v in np.nonzero(P[u] > 0)[0]:
                v = int(v)
                if not seen[v]:
                    seen[v] = True
                    level[v] = level[u] + 1
                    queue.append(v)
        return tuple(level[a] % p for a in range(n))

    # -- sampling ------------------------------------------------------------

    def sample_symbol(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.alphabet_size, p=self.stationary))

    def sample_path(self, rng: np.random.Generator, span: tuple[int, int],
                    anchor: tuple[int, int] | None = None) -> np.ndarray:
        """Stationary path on coordinates span[0]..span[1] inclusive.

        ``anchor = (coordinate, symbol)`` pins one coordinate; otherwise the
        left endpoint is drawn from pi.  Forward steps use the transition
        matrix, backward steps the reverse kernel, so all finite-dimensional
        distributions are exactly stationary.
        """
        lo, hi = span
        if hi < lo:
            raise MarkovMeasureError("empty span")
        if anchor is None:
            a_coord, a_sym = lo, self.sample_symbol(rng)
        else:
            a_coord, a_sym = anchor
            if not (lo <= a_coord <= hi):
                raise MarkovMeasureError("anchor outside the span")
            if not (0 <= a_sym < self.alphabet_size):
                raise MarkovMeasureError("anchor symbol out of range")
        out = np.empty(hi - lo + 1, dtype=np.int64)
        out[a_coord - lo] = a_sym
        cum_fwd = self._cum_fwd
        cum_bwd = np.cumsum(self.reverse_kernel(), axis=1)
        cur = a_sym
        for j in range(a_coord + 1, hi + 1):
            cur = int(np.searchsorted(cum_fwd[cur], rng.random(), side="right"))
            out[j - lo] = cur
        cur = a_sym
        for j in range(a_coord - 1, lo - 1, -1):
            cur = int(np.searchsorted(cum_bwd[cur], rng.random(), side="right"))
            out[j - lo] = cur
        return out

    def __repr__(self) -> str:
        return "MarkovMeasure(m=%d, h=%.6f)" % (self.alphabet_size, self.entropy_rate())


# --- presets ------------------------------------------------------------------

_PHI = (1.0 + math.sqrt(5.0)) / 2.0

TWO_STATE_LAZY = ((0.9, 0.1), (0.2, 0.8))


def measure_preset(name: str, p: float = 0.5) -> MarkovMeasure:
    """Named measures: full-2-bernoulli(p), golden-mean-parry, two-state-lazy,
    period-2, period-2-branching."""
    if name == "full-2-bernoulli":
        if not 0.0 < p < 1.0:
            raise MarkovMeasureError("bernoulli parameter must be in (0, 1)")
        return MarkovMeasure(system_preset("full-2"), ((1 - p, p), (1 - p, p)), strict=True)
    if name == "golden-mean-parry":
        row0 = (1.0 / _PHI, 1.0 / _PHI ** 2)
        return MarkovMeasure(system_preset("golden-mean"), (row0, (1.0, 0.0)), strict=True)
    if name == "two-state-lazy":
        return MarkovMeasure(system_preset("two-state-lazy"), TWO_STATE_LAZY, strict=True)
    if name == "period-2":
        return MarkovMeasure(system_preset("period-2"), ((0.0, 1.0), (1.0, 0.0)), strict=True)
    if name == "period-2-branching":
        half = (
            (0.0, 0.0, 0.5, 0.5),
            (0.0, 0.0, 0.5, 0.5),
            (0.5, 0.5, 0.0, 0.0),
            (0.5, 0.5, 0.0, 0.0),
        )
        return MarkovMeasure(system_preset("period-2-branching"), half, strict=True)
    raise MarkovMeasureError("unknown measure preset %r" % name)


MEASURE_PRESET_NAMES = (
    "full-2-bernoulli",
    "golden-mean-parry",
    "two-state-lazy",
    "period-2",
    "period-2-branching",
)


def measure_from_spec(spec: dict, system: SftSystem | None = None) -> MarkovMeasure:
    """Build a measure from {"preset": name} or {"transition": [[...]]}.

    A preset overrides an explicit matrix.  ``strict`` toggles full-support
    validation for explicit matrices.
    """
    if "preset" in spec:
        kw = {}
        if "p" in spec:
            kw["p"] = float(spec["p"])
        return measure_preset(spec["preset"], **kw)
    if "transition" not in spec:
        raise MarkovMeasureError("measure spec needs 'preset' or 'transition'")
    P = spec["transition"]
    if system is None:
        n = len(P)
        adjacency = tuple(tuple(1 if float(v) > 0 else 0 for v in row) for row in P)
        system = SftSystem(n, adjacency)
    return MarkovMeasure(system, P, strict=bool(spec.get("strict", False)))
