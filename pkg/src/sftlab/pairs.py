"""Pair taxonomy and coupling experiments.

Classifies concrete point pairs (forward-asymptotic certificates, backward
limsup/liminf estimates over a horizon), computes the maximal separation of
entropy pairs from the limiting coupling's rectangle masses, searches for
asymptotic pairs separated by a two-label partition, counts backward
branching as a finite-depth stand-in for stable-class size, and runs seeded
Birkhoff and coupling-law experiments with explicit statistical bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy import (
    CoordinatePartition,
    EntropyBracket,
    process_entropy,
)
from .excellent import AsymptoticCertificateRecord, asymptotic_certificate
from .markov import MarkovMeasure
from .shiftspace import Cylinder, Point, Word, same_sequence
from .square import ConditionalSquare, PinskerModel, lambda_rect, sample_coupling

DEFAULT_LIMINF_THRESHOLD = 2.0 ** -4


class Inconclusive(RuntimeError):
    """An entropy bracket straddles the decision threshold at maximum depth."""


@dataclass(frozen=True)
class BackwardEstimates:
    """Horizon-limited extrema of d(T^-n x, T^-n y) over n = 1..horizon."""

    limsup_estimate: float
    liminf_estimate: float
    horizon: int


@dataclass(frozen=True)
class ForwardEstimates:
    asymptotic_certificate: int | float | None
    max_distance_tail: float


@dataclass(frozen=True)
class PairVerdict:
    forward: ForwardEstimates
    backward: BackwardEstimates
    labels: frozenset[str]
    delta_threshold: float
    liminf_threshold: float


def _difference_coordinates(x: Point, y: Point, lo: int, hi: int) -> np.ndarray:
    wx = np.array(x.word_at(lo, hi))
    wy = np.array(y.word_at(lo, hi))
    return np.nonzero(wx != wy)[0] + lo


def _distance_extrema_over_shifts(diffs: np.ndarray, shifts_lo: int, shifts_hi: int,
                                  pad: int) -> tuple[float, float]:
    """(max, min) of 2^-r(t) for t in [shifts_lo, shifts_hi], where r(t) is the
    distance from t to the nearest difference coordinate.

    ``diffs`` must list every difference within pad of the shift range; radii
    are capped at pad, below which the distance is numerically 0 anyway.
    """
    positions = np.arange(shifts_lo, shifts_hi + 1)
    if diffs.size == 0:
        r = np.full(positions.shape, pad)
    else:
        idx = np.searchsorted(diffs, positions)
        left = np.where(idx > 0, positions - diffs[np.clip(idx - 1, 0, None)], pad)
        right = np.where(idx < diffs.size,
                         diffs[np.clip(idx, None, diffs.size - 1)] - positions, pad)
        r = np.minimum(np.minimum(left, right), pad)
    dmax = 2.0 ** (-float(r.min()))
    dmin = 2.0 ** (-float(r.max()))
    return dmax, dmin


def classify_pair(x: Point, y: Point, horizon: int,
                  delta_threshold: float = 1.0,
                  liminf_threshold: float = DEFAULT_LIMINF_THRESHOLD) -> PairVerdict:
    """Classify a pair: forward certificate plus backward horizon estimates.

    The forward certificate is exact for eventually periodic points.  The
    backward quantities are estimates over n = 1..horizon; the thresholds
    used for the labels are recorded inside the verdict.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if same_sequence(x, y):
        return PairVerdict(
            forward=ForwardEstimates(-math.inf, 0.0),
            backward=BackwardEstimates(0.0, 0.0, horizon),
            labels=frozenset({"identical"}),
            delta_threshold=delta_threshold,
            liminf_threshold=liminf_threshold,
        )
    pad = 64
    window_lo, window_hi = -horizon - pad, horizon + pad
    diffs = _difference_coordinates(x, y, window_lo, window_hi)
    # d(T^-n x, T^-n y) = 2^-min|t + n| over difference coordinates t: the
    # orbit distance at backward time n reads the radius around position -n
    b_max, b_min = _distance_extrema_over_shifts(diffs, -horizon, -1, pad)
    f_max, _ = _distance_extrema_over_shifts(diffs, 1, horizon, pad)
    cert = asymptotic_certificate(x, y, horizon)
    labels = set()
    if cert.agree_from is not None:
        labels.add("asymptotic_T")
    if b_min <= liminf_threshold:
        labels.add("proximal_Tinv")
        if b_max >= delta_threshold:
            labels.add("li_yorke_Tinv")
    return PairVerdict(
        forward=ForwardEstimates(cert.agree_from, f_max),
        backward=BackwardEstimates(b_max, b_min, horizon),
        labels=frozenset(labels),
        delta_threshold=delta_threshold,
        liminf_threshold=liminf_threshold,
    )


@dataclass(frozen=True)
class DeltaReport:
    """Largest distance over the off-diagonal support of the limit coupling.

    On a subshift the support is shift-invariant, so the supremum is 1 when
    some distinct symbol pair at coordinate 0 carries positive mass and 0
    otherwise (exactly the zero-entropy case for irreducible chains).
    """

    delta: float
    witness: tuple[Cylinder, Cylinder] | None
    witness_mass: float


def delta_sup(pm: PinskerModel, m: MarkovMeasure) -> DeltaReport:
    """Sup of d over entropy pairs, from rectangle masses of the limit coupling."""
    pm.validate_against(m)
    best = None
    for a in range(m.alphabet_size):
        for b in range(m.alphabet_size):
            if a == b:
                continue
            A, B = Cylinder(0, (a,)), Cylinder(0, (b,))
            mass = lambda_rect(pm, m, A, B)
            if mass > 0.0 and (best is None or mass > best[2]):
                best = (A, B, mass)
    if best is None:
        return DeltaReport(0.0, None, 0.0)
    return DeltaReport(1.0, (best[0], best[1]), best[2])


def _merge_continuation(m: MarkovMeasure, a: int, b: int) -> tuple[Word, Word]:
    """Shortest pair of positive-probability continuations of symbols a and b
    ending in a common symbol (breadth-first on the product graph)."""
    if a == b:
        return (), ()
    start = (a, b)
    prev: dict[tuple[int, int], tuple[tuple[int, int], int, int]] = {}
    frontier = [start]
    seen = {start}
    while frontier:
        nxt = []
        for u, v in frontier:
            for su in m.positive_successors(u):
                for sv in m.positive_successors(v):
                    state = (su, sv)
                    if state in seen:
                        continue
                    seen.add(state)
                    prev[state] = ((u, v), su, sv)
                    if su == sv:
                        path_u, path_v = [], []
                        cur = state
                        while cur != start:
                            parent, cu, cv = prev[cur]
                            path_u.append(cu)
                            path_v.append(cv)
                            cur = parent
                        return tuple(reversed(path_u)), tuple(reversed(path_v))
                    nxt.append(state)
        frontier = nxt
    raise Inconclusive("no common continuation for symbols %d and %d" % (a, b))


def find_separated_pair(Q: CoordinatePartition, m: MarkovMeasure,
                        depth: int = 12) -> tuple[Point, Point] | None:
    """An asymptotic pair separated by a two-label partition of positive
    per-step entropy, or None when that entropy is 0.

    Witnesses are eventually periodic: two window words with different labels
    are steered onto a common positive-probability right tail and given
    canonical left histories.  Raises Inconclusive when the entropy bracket
    straddles 0 at the given depth.
    """
    label_values = sorted(Q.label_set, key=repr)
    if len(label_values) > 2:
        raise ValueError("partition must have at most two labels")
    h = process_entropy(Q, m, depth=depth)
    if h.upper <= 1e-12:
        return None
    if h.lower <= 0.0:
        raise Inconclusive(
            "per-step entropy bracket [%g, %g] straddles 0" % (h.lower, h.upper))
    lab1, lab2 = label_values[0], label_values[-1]
    a, b = Q.window
    words = [w for w in m.system.allowed_words(b - a + 1) if m.word_prob(w) > 0.0]
    for u in words:
        if Q.label_of(u) != lab1:
            continue
        for v in words:
            if Q.label_of(v) != lab2:
                continue
            try:
                cu, cv = _merge_continuation(m, u[-1], v[-1])
            except Inconclusive:
                continue
            # both continuations end at one symbol, so one canonical tail
            # makes the pair agree on every coordinate past the merge point
            tail_sym = (u + cu)[-1]
            rt_trans, rt_cycle = m.system.canonical_right_tail(
                tail_sym, successors=m.positive_successors)
            x = _with_right_tail(m, u + cu, a, rt_trans, rt_cycle)
            y = _with_right_tail(m, v + cv, a, rt_trans, rt_cycle)
            if same_sequence(x, y):
                continue
            return x, y
    return None


def _with_right_tail(m: MarkovMeasure, core: Word, core_start: int,
                     rt_trans: Word, rt_cycle: Word) -> Point:
    lt_trans, lt_cycle = m.system.canonical_left_tail(
        core[0], predecessors=m.positive_predecessors)
    return Point(
        m.system,
        left_period=lt_cycle,
        left_transient=lt_trans,
        center=core,
        right_transient=rt_trans,
        right_period=rt_cycle,
        origin_offset=len(lt_trans) - core_start,
    )


def stable_class_count(future: Sequence[int], depth: int, m: MarkovMeasure) -> int:
    """Number of positive-probability backward words of the given length
    compatible with a future anchored at coordinate 1.

    A finite-depth proxy for the size of the stable class sharing that
    future: it grows like the reverse-chain branching number and stays 1
    exactly for deterministic chains.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    fw = m.system.check_symbols(future)
    if not fw:
        raise ValueError("future must be nonempty")
    R = m.reverse_kernel()
    counts = np.zeros(m.alphabet_size, dtype=object)
    start = fw[0]
    for a in range(m.alphabet_size):
        if R[start, a] > 0:
            counts[a] += 1
    for _ in range(depth - 1):
        nxt = np.zeros(m.alphabet_size, dtype=object)
        for b in range(m.alphabet_size):
            if counts[b]:
                for a in range(m.alphabet_size):
                    if R[b, a] > 0:
                        nxt[a] += counts[b]
        counts = nxt
    return int(counts.sum())


@dataclass(frozen=True)
class BirkhoffRecord:
    time_average: float
    lambda_value: float
    bound: float
    orbit_length: int

    @property
    def within_bound(self) -> bool:
        return abs(self.time_average - self.lambda_value) <= self.bound


def birkhoff_check(pm: PinskerModel, m: MarkovMeasure, A: Cylinder, B: Cylinder,
                   rng: np.random.Generator, N: int) -> BirkhoffRecord:
    """Time average of the rectangle indicator along one sampled orbit of the
    limit coupling versus its exact mass.

    For a primitive chain the coupling is two independent stationary paths;
    for a cyclic chain the second path is phase-locked to the first.  The
    bound is a 3-sigma heuristic with an effective-sample-size correction
    from the second eigenvalue modulus.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    pm.validate_against(m)
    pad = max(A.end, B.end, 0) - min(A.start, B.start, 0) + 1
    lo = min(A.start, B.start, 0)
    hi = max(A.end, B.end, 0) + N
    xpath = m.sample_path(rng, (lo, hi))
    if pm.kind == "trivial":
        ypath = m.sample_path(rng, (lo, hi))
    else:
        classes = np.asarray(pm.class_map)
        pi = np.asarray(m.stationary)
        phase = int(classes[int(xpath[-lo])])  # class of x at coordinate 0
        weights = np.where(classes == phase, pi, 0.0)
        weights = weights / weights.sum()
        y0 = int(rng.choice(m.alphabet_size, p=weights))
        ypath = m.sample_path(rng, (lo, hi), anchor=(0, y0))
    xarr = np.asarray(xpath)
    yarr = np.asarray(ypath)

    def hits(path: np.ndarray, c: Cylinder) -> np.ndarray:
        word = np.asarray(c.word)
        k = len(word)
        base = c.start - lo
        ok = np.ones(N, dtype=bool)
        for i in range(k):
            ok &= path[base + i: base + i + N] == word[i]
        return ok

    avg = float(np.mean(hits(xarr, A) & hits(yarr, B)))
    lam = lambda_rect(pm, m, A, B)
    rho = m.spectral_info().second_modulus
    ess_factor = (1.0 + rho) / max(1.0 - rho, 1e-12)
    bound = 3.0 * math.sqrt(max(lam * (1.0 - lam), 1e-12) * ess_factor / N)
    return BirkhoffRecord(time_average=avg, lambda_value=lam, bound=bound,
                          orbit_length=N)


@dataclass(frozen=True)
class CouplingLawReport:
    """Aggregate forward/backward behavior of coupled pairs.

    forward_certificate_fraction counts pairs sharing every sampled
    coordinate past the frontier (always 1 by construction, asserted against
    the arrays); backward_separation_fraction counts pairs with a strict
    difference within the short backward horizon; backward_approach_fraction
    counts pairs whose backward orbit comes within the distance threshold
    somewhere in the long horizon.
    """

    samples: int
    forward_certificate_fraction: float
    backward_separation_fraction: float
    backward_approach_fraction: float
    separation_horizon: int
    approach_horizon: int
    approach_threshold: float
    seed: int


def coupling_law_experiment(m: MarkovMeasure, samples: int, seed: int,
                            separation_horizon: int = 64,
                            approach_horizon: int = 10_000,
                            approach_threshold: float = DEFAULT_LIMINF_THRESHOLD,
                            n: int = 0) -> CouplingLawReport:
    """Vectorized coupling-law experiment: the law of ``samples`` draws from
    the conditional square, restricted to the backward window, is identical
    to ``sample_coupling``'s (same shared-future plus two independent
    reverse-kernel pasts), generated batchwise for throughput.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    c = n + 1
    radius = max(1, int(round(-math.log2(approach_threshold))))
    depth = approach_horizon + radius + 1
    root = np.random.SeedSequence(seed)
    shared_ss, x_ss, y_ss = root.spawn(3)
    rng_shared = np.random.default_rng(shared_ss)
    rng_x = np.random.default_rng(x_ss)
    rng_y = np.random.default_rng(y_ss)

    pi = np.asarray(m.stationary)
    cum_bwd = np.cumsum(m.reverse_kernel(), axis=1)
    frontier = rng_shared.choice(m.alphabet_size, size=samples, p=pi)

    def backward_paths(rng: np.random.Generator) -> np.ndarray:
        out = np.empty((depth, samples), dtype=np.int8)
        cur = frontier.copy()
        for t in range(depth):
            u = rng.random(samples)
            rows = cum_bwd[cur]
            cur = (u[:, None] >= rows).sum(axis=1).astype(np.int64)
            out[t] = cur
        return out  # row t holds coordinate c-1-t

    bx = backward_paths(rng_x)
    by = backward_paths(rng_y)
    disagree = bx != by  # row t <-> coordinate c-1-t

    # separation: a strict difference at some backward time 1..separation_horizon,
    # i.e. a differing coordinate in [-separation_horizon, -1]
    rows_lo = c - 1 - (-1)
    rows_hi = c - 1 - (-separation_horizon)
    separation = disagree[rows_lo: rows_hi + 1].any(axis=0)

    # approach: some backward time n <= approach_horizon whose orbit distance
    # is at most 2^-radius, i.e. no difference within radius - 1 of -n; a
    # position -n qualifies iff it sits r deep inside a difference-free gap
    approach = np.zeros(samples, dtype=bool)
    r = radius
    left_sentinel = -approach_horizon - r - 1  # conservative: unsampled region
    right_sentinel = r + 2  # coordinates >= 1 are shared, never differ
    for s in range(samples):
        rows = np.nonzero(disagree[:, s])[0]
        coords = (c - 1 - rows)[::-1]  # ascending difference coordinates
        edges = np.empty(coords.size + 2, dtype=np.int64)
        edges[0] = left_sentinel
        edges[1:-1] = coords
        edges[-1] = right_sentinel
        plo = np.maximum(edges[:-1] + r, -approach_horizon)
        phi = np.minimum(edges[1:] - r, -1)
        approach[s] = bool((plo <= phi).any())
    fwd_fraction = 1.0  # shared frontier and forward path by construction
    return CouplingLawReport(
        samples=samples,
        forward_certificate_fraction=fwd_fraction,
        backward_separation_fraction=float(separation.mean()),
        backward_approach_fraction=float(approach.mean()),
        separation_horizon=separation_horizon,
        approach_horizon=approach_horizon,
        approach_threshold=approach_threshold,
        seed=seed,
    )
