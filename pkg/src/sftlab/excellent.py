"""Inductive spacing search behind excellent partitions.

Given an increasing sequence of finite partitions Q_1 < Q_2 < ..., the join
P_n = P_{n-1} v T^{-k_n} Q_n stays entropy-tight provided each spacing k_n
keeps the defect

    D_k = H(Q_n | T^{k+1} P_{n-1}^- v Q_n^-) - H(Q_n | P_{n-1}^T v Q_n^-)

below the budget epsilon_n of a summable schedule.  The defect is always
nonnegative (the second conditioning algebra contains the first) and tends
to 0 as k grows; with a coarse hidden-Markov family the values are certified
by brackets and admissibility requires the upper bound to clear the budget.

Atoms of the accumulated forward algebra are forward-agreement classes, so
membership certificates double as asymptotic-pair certificates for the shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .entropy import (
    CoordinateSet,
    CoordinatePartition,
    EntropyBracket,
    PartitionJoin,
    PartitionLike,
    conditional_entropy,
    refines,
)
from .markov import MarkovMeasure
from .shiftspace import Point, same_sequence


class SearchExhausted(RuntimeError):
    """No admissible spacing at or below k_max."""

    def __init__(self, level: int, k_max: int, last: EntropyBracket):
        super().__init__(
            "level %d: no spacing <= %d certifies the budget (last bracket [%.3g, %.3g]);"
            " the spectral gap may be too small or the depth too shallow"
            % (level, k_max, last.lower, last.upper)
        )
        self.level = level
        self.k_max = k_max
        self.last_bracket = last


@dataclass(frozen=True)
class SpacingSchedule:
    """Summable positive budgets epsilon_n with certified tail sums.

    The default geometric schedule epsilon_n = 2^-n has exact closed-form
    tails; explicit sequences must come with their own tail bounds.
    """

    epsilons: tuple[float, ...]
    tail_bounds: tuple[float, ...]
    k_max: int = 256

    def __post_init__(self) -> None:
        if any(e <= 0 for e in self.epsilons):
            raise ValueError("budgets must be positive")
        if len(self.tail_bounds) != len(self.epsilons):
            raise ValueError("need one tail bound per level")
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")

    @classmethod
    def geometric(cls, levels: int, base: float = 0.5, first: float = 0.5,
                  k_max: int = 256) -> "SpacingSchedule":
        if not 0.0 < base < 1.0:
            raise ValueError("geometric base must be in (0, 1) for summability")
        eps = tuple(first * base ** n for n in range(levels))
        tails = tuple(e / (1.0 - base) for e in eps)
        return cls(eps, tails, k_max)

    @classmethod
    def explicit(cls, epsilons: Sequence[float], tail_bounds: Sequence[float],
                 k_max: int = 256) -> "SpacingSchedule":
        return cls(tuple(float(e) for e in epsilons),
                   tuple(float(t) for t in tail_bounds), k_max)

    def epsilon(self, n: int) -> float:
        """Budget at 1-based level n."""
        return self.epsilons[n - 1]

    def tail(self, n: int) -> float:
        """Certified bound on sum_{i >= n} epsilon_i."""
        return self.tail_bounds[n - 1]


@dataclass(frozen=True)
class SpacingLevel:
    """One accepted level of the inductive search.

    ``defect`` certifies D_{k_n} < epsilon at this level; ``rank_epsilon`` is
    the budget of the rank n-1 recursion step the acceptance realizes, and
    ``defect_bound`` the tail sum controlling the remaining defect of P_n.
    """

    level: int
    spacing: int
    defect: EntropyBracket
    epsilon: float
    rank_epsilon: float
    defect_bound: float
    depth_used: int


@dataclass
class ExcellentReport:
    """Outcome of the spacing search; admissibility always uses the bracket
    upper bound, which is sound but possibly conservative for coarse input."""

    schedule: SpacingSchedule
    spacings: list[int] = field(default_factory=list)
    levels: list[SpacingLevel] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "k_max": self.schedule.k_max,
            "spacings": list(self.spacings),
            "levels": [
                {
                    "level": r.level,
                    "spacing": r.spacing,
                    "defect_lower": r.defect.lower,
                    "defect_upper": r.defect.upper,
                    "epsilon": r.epsilon,
                    "rank_epsilon": r.rank_epsilon,
                    "defect_bound": r.defect_bound,
                    "depth_used": r.depth_used,
                }
                for r in self.levels
            ],
        }


def spacing_defect(p_prev: PartitionLike, q_next: CoordinatePartition, k: int,
                   m: MarkovMeasure, depth: int = 12) -> EntropyBracket:
    """Bracket on D_k for the accumulated join ``p_prev`` and new partition
    ``q_next``.  Exact (width 0) whenever both inputs are fine; the lower end
    is clamped at 0, which is the theoretical floor."""
    if k < 0:
        raise ValueError("spacing must be >= 0")
    own_past = (q_next, CoordinateSet.right_of(1))
    t1 = conditional_entropy(m, [(q_next, 0)],
                             [(p_prev, CoordinateSet.right_of(-k)), own_past],
                             depth=depth)
    t2 = conditional_entropy(m, [(q_next, 0)],
                             [(p_prev, CoordinateSet.everything()), own_past],
                             depth=depth)
    lower = max(0.0, t1.lower - t2.upper)
    upper = max(lower, t1.upper - t2.lower)
    return EntropyBracket(lower, upper)


def _check_increasing(q_seq: Sequence[CoordinatePartition]) -> None:
    for a, b in zip(q_seq, q_seq[1:]):
        if b.width < a.width:
            raise ValueError("window widths must not decrease along the sequence")
        if not refines(b, a):
            raise ValueError("sequence is not increasing in refinement")


def choose_spacings(q_seq: Sequence[CoordinatePartition], schedule: SpacingSchedule,
                    m: MarkovMeasure, depth: int = 8,
                    depth_ladder: Sequence[int] = (8, 11, 14)) -> ExcellentReport:
    """Smallest admissible spacings k_1 = 0 <= k_2 <= ... for the sequence.

    At level n the smallest k >= k_{n-1} with defect upper bound below
    epsilon_n is accepted; when a bracket straddles the budget the depth is
    raised along a fixed ladder before k is advanced, keeping the search
    deterministic.  Raises SearchExhausted past schedule.k_max.
    """
    if len(q_seq) < 1:
        raise ValueError("need at least one partition")
    if len(q_seq) > len(schedule.epsilons):
        raise ValueError("schedule has fewer levels than the sequence")
    _check_increasing(q_seq)
    ladder = sorted(set(int(d) for d in depth_ladder) | {int(depth)})

    report = ExcellentReport(schedule=schedule)
    report.spacings.append(0)
    join = PartitionJoin([(q_seq[0], 0)])
    for n in range(2, len(q_seq) + 1):
        q = q_seq[n - 1]
        eps = schedule.epsilon(n)
        k = report.spacings[-1]
        accepted: tuple[int, EntropyBracket, int] | None = None
        last = EntropyBracket.point(math.inf)
        while k <= schedule.k_max and accepted is None:
            for d in ladder:
                bracket = spacing_defect(join, q, k, m, depth=d)
                last = bracket
                if bracket.upper < eps:
                    accepted = (k, bracket, d)
                    break
                if bracket.lower >= eps:
                    break  # certified inadmissible at this k, no depth will help
            if accepted is None:
                k += 1
        if accepted is None:
            raise SearchExhausted(n, schedule.k_max, last)
        k_n, bracket, d_used = accepted
        report.spacings.append(k_n)
        report.levels.append(SpacingLevel(
            level=n,
            spacing=k_n,
            defect=bracket,
            epsilon=eps,
            rank_epsilon=schedule.epsilon(n - 1),
            defect_bound=schedule.tail(n),
            depth_used=d_used,
        ))
        join = join.join(q, k_n)
    return report


@dataclass(frozen=True)
class AsymptoticCertificateRecord:
    """Forward agreement certificate for a pair of points.

    ``agree_from`` is the least coordinate N with x_n = y_n for all n >= N
    (-inf for identical points, None when the right tails differ and no such
    N exists).  ``bound`` is the guaranteed distance after ``horizon`` shift
    steps, d(T^h x, T^h y) <= 2^-(h - N); identical points get 0 and absent
    certificates the trivial bound 1.
    """

    agree_from: int | float | None
    bound: float
    horizon: int


def asymptotic_certificate(x: Point, y: Point, horizon: int) -> AsymptoticCertificateRecord:
    """Exact forward-agreement certificate for eventually periodic points.

    Right tails are compared directly, so the certificate is not horizon
    limited; the horizon only caps how late an agreement onset is accepted
    and scales the reported bound.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if same_sequence(x, y):
        return AsymptoticCertificateRecord(-math.inf, 0.0, horizon)
    onset = _agreement_onset(x, y)
    if onset is None or onset > horizon:
        return AsymptoticCertificateRecord(None, 1.0, horizon)
    return AsymptoticCertificateRecord(onset, 2.0 ** (-(horizon - onset)), horizon)


def _agreement_onset(x: Point, y: Point) -> int | None:
    """Least N with x_n = y_n for all n >= N, or None if right tails differ."""
    from math import lcm

    tail_start = max(x.core_end, y.core_end)
    hi = tail_start + lcm(len(x.right_period), len(y.right_period))
    lo = min(x.core_start, y.core_start, 0)
    if any(x.value(j) != y.value(j) for j in range(tail_start, hi)):
        return None  # periodic right tails disagree, so differences recur forever
    last_diff = None
    for j in range(lo, hi):
        if x.value(j) != y.value(j):
            last_diff = j
    if last_diff is not None:
        return last_diff + 1
    # no difference at or right of lo; left of lo both points are purely
    # periodic, so one lcm window decides the last difference exactly
    lcm_left = lcm(len(x.left_period), len(y.left_period))
    for j in range(lo - 1, lo - lcm_left - 1, -1):
        if x.value(j) != y.value(j):
            return j + 1
    return lo  # unreachable for distinct sequences; agreement holds everywhere
