"""Conditional squares of a Markov measure over forward coordinate algebras.

With F_n the algebra generated by coordinates >= n+1, the conditional square
nu_n couples two copies of the measure that share everything F_n sees and are
conditionally independent below; by the Markov property every rectangle and
diagonal value reduces to a sum over the frontier symbol at coordinate n+1.
As n grows nu_n converges to the coupling over the zero-entropy factor: the
plain product for primitive chains, the phase-synchronized product for
periodic ones.  A seeded sampler realizes the same couplings pathwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .markov import MarkovMeasure
from .shiftspace import Cylinder, Point, Word

_ATOL = 1e-12


class SquareError(ValueError):
    """Invalid square, model, or cylinder input."""


@dataclass(frozen=True)
class ConditionalSquare:
    """The self-coupling nu_n of ``measure`` over coordinates >= n+1."""

    measure: MarkovMeasure
    n: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise SquareError("n must be >= 0")

    @property
    def frontier(self) -> int:
        """First shared coordinate."""
        return self.n + 1


@dataclass(frozen=True)
class PinskerModel:
    """Zero-entropy factor model of an irreducible Markov chain.

    ``kind`` is "trivial" for primitive (mixing) chains and "cyclic" for
    period-p chains, where the factor is the rotation of the p cyclic classes
    and ``class_map`` sends each symbol to its class.  The identification is
    cross-validated computationally against the limit of the rectangle
    profiles (see ``convergence_profile``).
    """

    kind: str
    period: int = 1
    class_map: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("trivial", "cyclic"):
            raise SquareError("kind must be 'trivial' or 'cyclic'")
        if self.kind == "trivial" and self.period != 1:
            raise SquareError("trivial model must have period 1")
        if self.kind == "cyclic" and self.period < 2:
            raise SquareError("cyclic model needs period >= 2")

    @classmethod
    def identify(cls, m: MarkovMeasure) -> "PinskerModel":
        info = m.spectral_info()
        if info.is_primitive:
            return cls("trivial")
        return cls("cyclic", period=info.period, class_map=m.cyclic_classes())

    def validate_against(self, m: MarkovMeasure) -> None:
        info = m.spectral_info()
        if self.kind == "trivial":
            if not info.is_primitive:
                raise SquareError("trivial model on a periodic chain")
            return
        if info.period != self.period:
            raise SquareError("model period %d != chain period %d" % (self.period, info.period))
        if len(self.class_map) != m.alphabet_size:
            raise SquareError("class map size does not match the alphabet")
        classes = m.cyclic_classes()
        # accept any relabeling that rotates consistently with the chain
        offset = (self.class_map[0] - classes[0]) % self.period
        if any((self.class_map[a] - classes[a]) % self.period != offset
               for a in range(m.alphabet_size)):
            raise SquareError("class map is not the cyclic-class rotation of the chain")


def _conditional_weight(m: MarkovMeasure, c: Cylinder, frontier: int,
                        suffix: Word) -> float:
    """E(1_C | coordinates >= frontier) evaluated on the symbols ``suffix``
    occupying coordinates frontier, frontier+1, ...

    Splits the cylinder at the frontier: the part at coordinates >= frontier
    must match the suffix; the earlier part contributes the exact backward
    bridge probability given the frontier symbol.
    """
    lo, hi = c.start, c.end
    word = c.word
    if lo >= frontier:
        off = lo - frontier
        if off + len(word) > len(suffix):
            raise SquareError("suffix does not cover the cylinder")
        return 1.0 if all(suffix[off + i] == s for i, s in enumerate(word)) else 0.0
    split = min(hi, frontier - 1)
    left = word[: split - lo + 1]
    right = word[split - lo + 1:]
    if right:
        off = frontier - frontier  # right part starts exactly at the frontier
        if any(suffix[off + i] != s for i, s in enumerate(right)):
            return 0.0
    sigma = suffix[0]
    p = float(m.stationary[left[0]])
    for a, b in zip(left, left[1:]):
        p *= float(m.transition[a, b])
    gap = frontier - split
    p *= float(m.step_matrix(gap)[left[-1], sigma])
    pf = float(m.stationary[sigma])
    if pf <= 0.0:
        return 0.0
    return p / pf


def nu_rect(sq: ConditionalSquare, A: Cylinder, B: Cylinder) -> float:
    """Exact nu_n(A x B).

    Enumerates the shared symbols from the frontier through the right edge of
    the rectangle; both marginals of nu_n equal the measure itself.
    """
    m = sq.measure
    c = sq.frontier
    hi = max(c, A.end, B.end)
    total = 0.0
    for w in m.system.allowed_words(hi - c + 1):
        p = m.word_prob(w)
        if p <= 0.0:
            continue
        fa = _conditional_weight(m, A, c, w)
        if fa == 0.0:
            continue
        fb = _conditional_weight(m, B, c, w)
        if fb == 0.0:
            continue
        total += p * fa * fb
    return total


def lambda_rect(pm: PinskerModel, m: MarkovMeasure, A: Cylinder, B: Cylinder) -> float:
    """Rectangle mass of the limiting coupling over the zero-entropy factor.

    Trivial factor: the plain product mu(A) mu(B).  Cyclic factor: the
    product conditioned on a common phase; a cylinder pins the phase of
    coordinate 0 through its first symbol, so incompatible phases give 0.
    """
    pm.validate_against(m)
    pa, pb = m.cylinder_prob(A), m.cylinder_prob(B)
    if pm.kind == "trivial":
        return pa * pb
    if pa == 0.0 or pb == 0.0:
        return 0.0
    pha = (pm.class_map[A.word[0]] - A.start) % pm.period
    phb = (pm.class_map[B.word[0]] - B.start) % pm.period
    if pha != phb:
        return 0.0
    return pm.period * pa * pb


def convergence_profile(m: MarkovMeasure, A: Cylinder, B: Cylinder, N: int) -> list[float]:
    """Exact sequence nu_n(A x B) for n = 0..N."""
    if N < 0:
        raise SquareError("N must be >= 0")
    return [nu_rect(ConditionalSquare(m, n), A, B) for n in range(N + 1)]


def diagonal_mass(sq: ConditionalSquare, L: int) -> float:
    """nu_n of pairs agreeing on the L coordinates 0, -1, ..., -L+1.

    Two conditionally independent backward extensions from the frontier agree
    on a word with the squared bridge probability; summing over words is a
    transfer computation with elementwise-squared matrices, exact for any L.
    """
    if L < 1:
        raise SquareError("L must be >= 1")
    m = sq.measure
    pi = np.asarray(m.stationary)
    P2 = np.asarray(m.transition) ** 2
    bridge = np.asarray(m.step_matrix(sq.frontier)) ** 2  # coordinate 0 -> frontier
    v = pi ** 2
    for _ in range(L - 1):
        v = v @ P2
    weights = v @ bridge  # indexed by the frontier symbol
    mask = pi > 0
    return float(np.sum(weights[mask] / pi[mask]))


def conditional_atom_masses(future: Sequence[int], L: int,
                            m: MarkovMeasure) -> list[tuple[Word, float]]:
    """Masses of length-L backward words given a future anchored at coordinate 1.

    The conditional law depends only on the symbol at coordinate 1; each mass
    is the corresponding product of reverse-kernel steps and the masses sum
    to 1 over the positively charged words.
    """
    if L < 1:
        raise SquareError("L must be >= 1")
    fw = m.system.check_symbols(future)
    if not fw:
        raise SquareError("future must be nonempty")
    if m.word_prob(fw) <= 0.0:
        raise SquareError("future word has probability 0")
    R = m.reverse_kernel()
    out: list[tuple[Word, float]] = []

    def rec(word: tuple[int, ...], mass: float) -> None:
        # word lists coordinates 0, -1, ... right-to-left while recursing
        if len(word) == L:
            out.append((tuple(reversed(word)), mass))
            return
        prev = word[-1] if word else fw[0]
        for a in range(m.alphabet_size):
            r = float(R[prev, a])
            if r > 0.0:
                rec(word + (a,), mass * r)

    rec((), 1.0)
    out.sort(key=lambda t: t[0])
    return out


@dataclass(frozen=True)
class CouplingSample:
    """A nu_n-distributed pair sharing all coordinates >= shared_from."""

    x: Point
    y: Point
    shared_from: int
    seed_record: dict


def sample_coupling(sq: ConditionalSquare, seed: int, horizon: int) -> CouplingSample:
    """Draw one pair from nu_n, exact on the window [-horizon, horizon].

    One seed spawns three independent streams (shared future, x past, y past)
    so batches are reproducible.  The shared forward path is stationary; the
    two pasts are conditionally independent reverse-kernel walks from the
    frontier symbol.  Beyond the horizon the tails follow the deterministic
    smallest positive-probability continuation, which never enters any
    statistic restricted to the window.
    """
    if horizon < 1:
        raise SquareError("horizon must be >= 1")
    m = sq.measure
    c = sq.frontier
    if horizon < c:
        raise SquareError("horizon must reach the frontier coordinate %d" % c)
    root = np.random.SeedSequence(seed)
    shared_ss, x_ss, y_ss = root.spawn(3)
    shared_rng = np.random.default_rng(shared_ss)
    x_rng = np.random.default_rng(x_ss)
    y_rng = np.random.default_rng(y_ss)

    shared = m.sample_path(shared_rng, (c, horizon))
    R = m.reverse_kernel()
    cum_bwd = np.cumsum(R, axis=1)

    def backward(rng: np.random.Generator) -> list[int]:
        cur = int(shared[0])
        path: list[int] = []
        for _ in range(c - 1, -horizon - 1, -1):
            cur = int(np.searchsorted(cum_bwd[cur], rng.random(), side="right"))
            path.append(cur)
        path.reverse()  # coordinates -horizon .. c-1
        return path

    px = backward(x_rng)
    py = backward(y_rng)

    def assemble(past: list[int]) -> Point:
        core = tuple(past) + tuple(int(s) for s in shared)
        lt_trans, lt_cycle = m.system.canonical_left_tail(
            core[0], predecessors=m.positive_predecessors)
        rt_trans, rt_cycle = m.system.canonical_right_tail(
            core[-1], successors=m.positive_successors)
        return Point(
            m.system,
            left_period=lt_cycle,
            left_transient=lt_trans,
            center=core,
            right_transient=rt_trans,
            right_period=rt_cycle,
            origin_offset=len(lt_trans) + horizon,
        )

    record = {
        "seed": int(seed),
        "streams": {
            "shared": list(shared_ss.spawn_key),
            "x_past": list(x_ss.spawn_key),
            "y_past": list(y_ss.spawn_key),
        },
        "horizon": int(horizon),
        "n": int(sq.n),
        "tail_rule": "smallest-positive-successor cycle",
    }
    x = assemble(px)
    y = assemble(py)
    if any(x.value(j) != y.value(j) for j in range(c, horizon + 1)):
        raise SquareError("internal error: shared suffix mismatch")
    return CouplingSample(x=x, y=y, shared_from=c, seed_record=record)
