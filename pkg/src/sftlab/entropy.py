"""Exact and bracketed conditional entropies of coordinate partitions.

A coordinate partition labels the contents of a finite coordinate window.
Conditioning information comes in two kinds:

* exact symbols on a coordinate set (points plus left/right rays), and
* partition labels observed along a set of shifts, e.g. the whole forward
  label process of a partition.

For exact-symbol conditioning the Markov property reduces everything to the
coordinates inside the observed hull plus the nearest observed coordinate on
each side (bridged with matrix powers), so those values are exact.  When a
non-injective ("coarse") labeling is observed along an infinite family of
shifts the value is generally not computable in closed form; the engine then
returns a certified bracket: truncating the observation family to a finite
depth conditions on less and gives an upper bound, while additionally
revealing the exact symbols at the truncation frontier screens everything
beyond it and gives a lower bound.  Both bounds are monotone in the depth.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .markov import MarkovMeasure
from .shiftspace import SftSystem, Word

DEFAULT_DEPTH = 12

_WIDTH_EXACT = 1e-12


class EntropyEngineError(ValueError):
    """Malformed partitions, conditioning sets, or an oversized problem."""


# ---------------------------------------------------------------------------
# coordinate sets (also used as sets of shifts)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordinateSet:
    """Finite list of integers plus an optional left ray (-inf, c] and/or
    right ray [c, +inf).  Normalization drops points inside the rays; two
    overlapping rays collapse to "everything"."""

    points: tuple[int, ...] = ()
    left_ray: int | None = None
    right_ray: int | None = None

    def __post_init__(self) -> None:
        lr, rr = self.left_ray, self.right_ray
        if lr is not None and rr is not None and lr >= rr - 1:
            object.__setattr__(self, "left_ray", 0)
            object.__setattr__(self, "right_ray", 1)
            object.__setattr__(self, "points", ())
            return
        pts = sorted({int(p) for p in self.points
                      if not (lr is not None and p <= lr)
                      and not (rr is not None and p >= rr)})
        object.__setattr__(self, "points", tuple(pts))

    # --- constructors

    @classmethod
    def empty(cls) -> "CoordinateSet":
        return cls()

    @classmethod
    def of(cls, *points: int) -> "CoordinateSet":
        return cls(points=tuple(points))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "CoordinateSet":
        return cls(points=tuple(range(lo, hi + 1)))

    @classmethod
    def right_of(cls, c: int) -> "CoordinateSet":
        return cls(right_ray=c)

    @classmethod
    def left_of(cls, c: int) -> "CoordinateSet":
        return cls(left_ray=c)

    @classmethod
    def everything(cls) -> "CoordinateSet":
        return cls(left_ray=0, right_ray=1)

    # --- queries

    @property
    def is_empty(self) -> bool:
        return not self.points and self.left_ray is None and self.right_ray is None

    @property
    def is_everything(self) -> bool:
        return self.left_ray is not None and self.right_ray is not None \
            and self.left_ray >= self.right_ray - 1

    def contains(self, c: int) -> bool:
        if self.left_ray is not None and c <= self.left_ray:
            return True
        if self.right_ray is not None and c >= self.right_ray:
            return True
        return c in self.points

    def covers_interval(self, lo: int, hi: int) -> bool:
        return all(self.contains(c) for c in range(lo, hi + 1))

    def shifted(self, d: int) -> "CoordinateSet":
        return CoordinateSet(
            points=tuple(p + d for p in self.points),
            left_ray=None if self.left_ray is None else self.left_ray + d,
            right_ray=None if self.right_ray is None else self.right_ray + d,
        )

    def union(self, other: "CoordinateSet") -> "CoordinateSet":
        lr = self.left_ray
        if other.left_ray is not None:
            lr = other.left_ray if lr is None else max(lr, other.left_ray)
        rr = self.right_ray
        if other.right_ray is not None:
            rr = other.right_ray if rr is None else min(rr, other.right_ray)
        return CoordinateSet(points=self.points + other.points, left_ray=lr, right_ray=rr)


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyBracket:
    """Certified interval [lower, upper] around an entropy value."""

    lower: float
    upper: float
    exact: bool = False

    def __post_init__(self) -> None:
        lo, hi = self.lower, self.upper
        if lo > hi:
            if lo - hi > 1e-9:
                raise EntropyEngineError("inverted bracket: [%r, %r]" % (lo, hi))
            lo = hi = 0.5 * (lo + hi)  # float noise from two independent runs
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "exact", hi - lo <= _WIDTH_EXACT)

    @classmethod
    def point(cls, v: float) -> "EntropyBracket":
        return cls(v, v)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, v: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= v <= self.upper + slack

    def __add__(self, other: "EntropyBracket") -> "EntropyBracket":
        return EntropyBracket(self.lower + other.lower, self.upper + other.upper)

    def __sub__(self, other: "EntropyBracket") -> "EntropyBracket":
        return EntropyBracket(self.lower - other.upper, self.upper - other.lower)


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------


class CoordinatePartition:
    """Finite partition given by labeling the allowed words of a window.

    Every adjacency-allowed word of the window length must receive exactly
    one label.  The partition is *fine* when the labeling is injective, i.e.
    the atoms are cylinders.

    ``components`` optionally factors a tuple labeling into smaller shared
    observations: pairs (partition, offset) whose joint value determines the
    label bijectively.  The engine uses them to recognize when shifted copies
    of family members observe the same underlying quantities.
    """

    def __init__(self, system: SftSystem, window: tuple[int, int],
                 labels: Mapping[Word, Hashable],
                 components: tuple[tuple["CoordinatePartition", int], ...] | None = None):
        a, b = int(window[0]), int(window[1])
        if b < a:
            raise EntropyEngineError("window must satisfy a <= b")
        table = {tuple(int(s) for s in w): v for w, v in labels.items()}
        allowed = list(system.allowed_words(b - a + 1))
        missing = [w for w in allowed if w not in table]
        if missing:
            raise EntropyEngineError("labeling misses allowed word %r" % (missing[0],))
        extra = [w for w in table if w not in set(allowed)]
        if extra:
            raise EntropyEngineError("labeling includes disallowed word %r" % (extra[0],))
        self.system = system
        self.window = (a, b)
        self._table = table
        self.fine = len(set(table.values())) == len(table)
        self.components = components

    @property
    def width(self) -> int:
        return self.window[1] - self.window[0] + 1

    @property
    def labels(self) -> Mapping[Word, Hashable]:
        return dict(self._table)

    @property
    def label_set(self) -> frozenset:
        return frozenset(self._table.values())

    def label_of(self, word: Word) -> Hashable:
        return self._table[tuple(word)]

    def label_distribution(self, m: MarkovMeasure) -> dict:
        dist: dict = {}
        for w, lab in self._table.items():
            p = m.word_prob(w)
            if p > 0.0:
                dist[lab] = dist.get(lab, 0.0) + p
        return dist

    def __repr__(self) -> str:
        kind = "fine" if self.fine else "coarse(%d labels)" % len(self.label_set)
        return "CoordinatePartition(window=%r, %s)" % (self.window, kind)


class PartitionJoin:
    """Common refinement of shifted coordinate partitions, kept factored.

    The join of T^{-k} images is represented as (partition, offset) pairs so
    the engine never materializes a labeling over the hull window.
    """

    def __init__(self, parts: Iterable[tuple[CoordinatePartition, int]]):
        self.parts = tuple((p, int(off)) for p, off in parts)
        if not self.parts:
            raise EntropyEngineError("empty join")

    @property
    def window(self) -> tuple[int, int]:
        los = [p.window[0] + off for p, off in self.parts]
        his = [p.window[1] + off for p, off in self.parts]
        return (min(los), max(his))

    def join(self, part: CoordinatePartition, offset: int) -> "PartitionJoin":
        return PartitionJoin(self.parts + ((part, offset),))

    def __repr__(self) -> str:
        return "PartitionJoin(%d parts, window=%r)" % (len(self.parts), self.window)


PartitionLike = CoordinatePartition | PartitionJoin


def _constituents(pl: PartitionLike) -> tuple[tuple[CoordinatePartition, int], ...]:
    if isinstance(pl, PartitionJoin):
        return pl.parts
    return ((pl, 0),)


def _expand_parts(pl: PartitionLike) -> list[tuple[CoordinatePartition, int]]:
    """Constituents of a join, with factored tuple labelings split into their
    component observations (value-equivalent, so entropies are unchanged)."""
    out: list[tuple[CoordinatePartition, int]] = []
    for p, off in _constituents(pl):
        if p.components:
            out.extend((cp, off + coff) for cp, coff in p.components)
        else:
            out.append((p, off))
    return out


def fine_partition(system: SftSystem, window: tuple[int, int]) -> CoordinatePartition:
    """Partition into cylinders: each allowed window word is its own label."""
    a, b = window
    return CoordinatePartition(system, window,
                               {w: w for w in system.allowed_words(b - a + 1)})


def single_label_partition(system: SftSystem, window: tuple[int, int]) -> CoordinatePartition:
    a, b = window
    return CoordinatePartition(system, window,
                               {w: 0 for w in system.allowed_words(b - a + 1)})


def parity_partition(system: SftSystem, window: tuple[int, int]) -> CoordinatePartition:
    """Label a window word by the parity of its symbol sum."""
    a, b = window
    return CoordinatePartition(system, window,
                               {w: sum(w) % 2 for w in system.allowed_words(b - a + 1)})


_INDICATOR_BASES: dict[tuple, CoordinatePartition] = {}


def _indicator_base(system: SftSystem, block: Word) -> CoordinatePartition:
    """Shared single-occurrence indicator; one instance per (system, block)
    so that shifted family members expose identical component observations."""
    key = (system, tuple(block))
    got = _INDICATOR_BASES.get(key)
    if got is None:
        k = len(block)
        got = CoordinatePartition(
            system, (0, k - 1),
            {w: (1 if w == tuple(block) else 0) for w in system.allowed_words(k)})
        _INDICATOR_BASES[key] = got
    return got


def block_indicator_partition(system: SftSystem, window: tuple[int, int],
                              block: Word = (1, 1)) -> CoordinatePartition:
    """Label a window word by the 0/1 occurrence pattern of a fixed block.

    Deliberately non-injective: words that contain the block nowhere in the
    same positions share a label.  Used as the coarse hidden-Markov family;
    the labeling factors into one shared indicator per window position.
    """
    a, b = window
    k = len(block)
    if b - a + 1 < k:
        raise EntropyEngineError("window shorter than the block")

    def lab(w: Word) -> tuple[int, ...]:
        return tuple(1 if w[i:i + k] == tuple(block) else 0 for i in range(len(w) - k + 1))

    base = _indicator_base(system, tuple(block))
    comps = tuple((base, a + i) for i in range(b - a + 1 - k + 1))
    return CoordinatePartition(system, window,
                               {w: lab(w) for w in system.allowed_words(b - a + 1)},
                               components=comps)


def projection_partition(system: SftSystem, window: tuple[int, int],
                         keep: Sequence[int]) -> CoordinatePartition:
    """Label a window word by the symbols at the given window-relative indices."""
    a, b = window
    idx = tuple(int(i) for i in keep)
    return CoordinatePartition(system, window,
                               {w: tuple(w[i] for i in idx)
                                for w in system.allowed_words(b - a + 1)})


def two_label_partition(system: SftSystem, window: tuple[int, int],
                        first_class: Iterable[Word]) -> CoordinatePartition:
    """Two-label partition: words in ``first_class`` get 1, the rest get 2."""
    a, b = window
    cls1 = {tuple(w) for w in first_class}
    return CoordinatePartition(system, window,
                               {w: (1 if w in cls1 else 2)
                                for w in system.allowed_words(b - a + 1)})


def partition_from_spec(system: SftSystem, spec: dict) -> CoordinatePartition:
    """Partition from {"window": [a, b], "fine": true} or an explicit labeling
    {"window": [a, b], "labels": {"010": "L", ...}} with words as digit strings."""
    window = tuple(int(v) for v in spec["window"])
    if spec.get("fine"):
        return fine_partition(system, window)
    raw = spec.get("labels")
    if raw is None:
        raise EntropyEngineError("partition spec needs 'labels' or 'fine': true")
    labels = {tuple(int(ch) for ch in key): val for key, val in raw.items()}
    return CoordinatePartition(system, window, labels)


def refines(finer: CoordinatePartition, coarser: CoordinatePartition) -> bool:
    """True iff every atom of ``finer`` sits inside an atom of ``coarser``.

    Checked by label factoring over the hull window: the finer label must
    determine the coarser one on every allowed hull word.
    """
    if finer.system is not coarser.system and finer.system != coarser.system:
        raise EntropyEngineError("partitions live over different systems")
    lo = min(finer.window[0], coarser.window[0])
    hi = max(finer.window[1], coarser.window[1])
    seen: dict = {}
    for w in finer.system.allowed_words(hi - lo + 1):
        kf = finer.label_of(w[finer.window[0] - lo: finer.window[1] - lo + 1])
        kc = coarser.label_of(w[coarser.window[0] - lo: coarser.window[1] - lo + 1])
        if seen.setdefault(kf, kc) != kc:
            return False
    return True


# ---------------------------------------------------------------------------
# the engine
# ---------------------------------------------------------------------------


class _Obs(NamedTuple):
    lo: int
    hi: int
    table: Mapping | None  # None: identity observation of a single symbol
    target: bool


_MAX_OBS = 4000
_MAX_STATES = 8_000_000


def _plogp(p: float) -> float:
    return p * math.log(p) if p > 0.0 else 0.0


def _problem_entropy(m: MarkovMeasure, obs: list[_Obs]) -> float:
    """H(target tuple | conditioning tuple) by dynamic programming.

    Walks the active coordinates left to right, keeping (context symbols,
    interned target signature, interned conditioning signature) states;
    unobserved stretches between active coordinates are bridged with matrix
    powers.  Cost scales with the number of distinguishable signatures.
    """
    if len(obs) > _MAX_OBS:
        raise EntropyEngineError("observation list too large (%d)" % len(obs))
    active = sorted({c for o in obs for c in range(o.lo, o.hi + 1)})
    ends: dict[int, list[int]] = {}
    for i, o in enumerate(obs):
        ends.setdefault(o.hi, []).append(i)
    # context to retain after processing c: from the least start of a window
    # still open (lo <= c < hi); otherwise just c itself for the next step
    keep_from = {}
    for c in active:
        opens = [o.lo for o in obs if o.lo <= c < o.hi]
        keep_from[c] = min(opens) if opens else c

    pi = m.stationary
    msize = m.alphabet_size
    t_intern: dict[tuple, int] = {}
    c_intern: dict[tuple, int] = {}

    # state: (ctx tuple, t_id, c_id) -> probability
    states: dict[tuple, float] = {}
    first = active[0]
    for s in range(msize):
        p = float(pi[s])
        if p <= 0.0:
            continue
        states[((s,), 0, 0)] = p
    ctx_start = first
    prev = first
    # emissions at the first coordinate
    states = _emit_and_trim(states, ctx_start, first, ends.get(first, ()),
                            obs, keep_from[first], t_intern, c_intern)
    ctx_start = keep_from[first]

    for c in active[1:]:
        g = c - prev
        W = m.step_matrix(g)
        new: dict[tuple, float] = {}
        for (ctx, tid, cid), p in states.items():
            row = W[ctx[-1]]
            for s in range(msize):
                w = float(row[s])
                if w <= 0.0:
                    continue
                key = (ctx + (s,), tid, cid)
                acc = new.get(key)
                new[key] = p * w if acc is None else acc + p * w
        if len(new) > _MAX_STATES:
            raise EntropyEngineError("state space exceeded %d entries" % _MAX_STATES)
        states = _emit_and_trim(new, ctx_start, c, ends.get(c, ()),
                                obs, keep_from[c], t_intern, c_intern)
        ctx_start = keep_from[c]
        prev = c

    joint: dict[tuple[int, int], float] = {}
    for (_ctx, tid, cid), p in states.items():
        key = (tid, cid)
        acc = joint.get(key)
        joint[key] = p if acc is None else acc + p
    h_joint = -sum(_plogp(p) for p in joint.values())
    cond: dict[int, float] = {}
    for (tid, cid), p in joint.items():
        cond[cid] = cond.get(cid, 0.0) + p
    h_cond = -sum(_plogp(p) for p in cond.values())
    return max(0.0, h_joint - h_cond)


def _emit_and_trim(states: dict, ctx_start: int, c: int, end_ids: Sequence[int],
                   obs: list[_Obs], keep: int, t_intern: dict, c_intern: dict) -> dict:
    if not end_ids and keep == ctx_start:
        return states
    cut = keep - ctx_start
    out: dict[tuple, float] = {}
    for (ctx, tid, cid), p in states.items():
        for i in end_ids:
            o = obs[i]
            word = ctx[o.lo - ctx_start: o.hi - ctx_start + 1]
            value = word[0] if o.table is None else o.table[word]
            if o.target:
                tid = _intern(t_intern, (tid, value))
            else:
                cid = _intern(c_intern, (cid, value))
        key = (ctx[cut:], tid, cid)
        acc = out.get(key)
        out[key] = p if acc is None else acc + p
    return out


def _intern(table: dict, key: tuple) -> int:
    got = table.get(key)
    if got is None:
        got = len(table) + 1
        table[key] = got
    return got


def _marginal_entropy(m: MarkovMeasure, coords: Sequence[int]) -> float:
    """Joint entropy of the chain sampled at a sorted finite coordinate set."""
    if not coords:
        return 0.0
    pi = m.stationary
    h = -sum(_plogp(float(p)) for p in pi)
    for a, b in zip(coords, coords[1:]):
        W = m.step_matrix(b - a)
        rows = -np.where(W > 0, W * np.log(np.where(W > 0, W, 1.0)), 0.0).sum(axis=1)
        h += float(pi @ rows)
    return h


@dataclass(frozen=True)
class _Reduced:
    target_obs: tuple
    label_obs: tuple        # (partition, lo, hi) with absolute windows
    coords: CoordinateSet
    trunc_left: bool
    trunc_right: bool
    col_left: int
    col_right: int
    wmax_left: int
    wmax_right: int
    target_fine: bool


def _reduce(m: MarkovMeasure, targets, cond_labels, cond_coords,
            depth: int) -> _Reduced | None:
    """Normalize a conditioning specification.  Returns None when the full
    conditioning algebra already determines every target observation."""
    t_comps: list[tuple[CoordinatePartition, int]] = []
    for pl, s in targets:
        for p, off in _expand_parts(pl):
            t_comps.append((p, s + off))
    if not t_comps:
        raise EntropyEngineError("no target observations")

    coords = cond_coords if cond_coords is not None else CoordinateSet.empty()
    finite: list[tuple[CoordinatePartition, int]] = []
    rays: list[tuple[CoordinatePartition, str, int]] = []
    for pl, shifts in cond_labels:
        if not isinstance(shifts, CoordinateSet):
            raise EntropyEngineError("shift sets must be CoordinateSet instances")
        for p, off in _expand_parts(pl):
            ss = shifts.shifted(off)
            a, b = p.window
            if p.fine:
                # exact symbols: windows along a shift ray tile a coordinate ray
                for s in ss.points:
                    coords = coords.union(CoordinateSet.interval(a + s, b + s))
                if ss.right_ray is not None:
                    coords = coords.union(CoordinateSet.right_of(a + ss.right_ray))
                if ss.left_ray is not None:
                    coords = coords.union(CoordinateSet.left_of(b + ss.left_ray))
                continue
            for s in ss.points:
                finite.append((p, s))
            if ss.right_ray is not None:
                rays.append((p, "R", ss.right_ray))
            if ss.left_ray is not None:
                rays.append((p, "L", ss.left_ray))

    # drop target observations the full conditioning algebra determines:
    # exact-symbol coverage, an identical finite observation, or membership
    # of the matching shift in an observation ray of the same partition
    finite_ids = {(id(p), s) for p, s in finite}

    def determined(p: CoordinatePartition, s: int) -> bool:
        a, b = p.window
        if coords.covers_interval(a + s, b + s):
            return True
        if (id(p), s) in finite_ids:
            return True
        for rp, side, s0 in rays:
            if rp is p and (s >= s0 if side == "R" else s <= s0):
                return True
        return False

    t_comps = [(p, s) for p, s in t_comps if not determined(p, s)]
    if not t_comps:
        return None
    t_obs = [(p, p.window[0] + s, p.window[1] + s) for p, s in t_comps]
    target_fine = all(p.fine for p, _ in t_comps)
    hull_lo = min(lo for _, lo, _ in t_obs)
    hull_hi = max(hi for _, _, hi in t_obs)

    finite = [(p, p.window[0] + s, p.window[1] + s) for p, s in finite
              if not coords.covers_interval(p.window[0] + s, p.window[1] + s)]

    col_right = max([hull_hi] + [hi for _, _, hi in finite]) + depth
    col_left = min([hull_lo] + [lo for _, lo, _ in finite]) - depth

    trunc_left = trunc_right = False
    wmax_left = wmax_right = 1
    kept: list[tuple[CoordinatePartition, int, int]] = []
    for p, side, s0 in rays:
        a, b = p.window
        width = b - a + 1
        if side == "R":
            # shifts s >= s0; shifts with window inside the exact right ray are
            # functions of retained exact conditioning and drop out exactly
            uncov_hi = None if coords.right_ray is None else coords.right_ray - a - 1
            if uncov_hi is not None and uncov_hi < s0:
                continue
            s_col = col_right - b
            kept_hi = s_col if uncov_hi is None else min(s_col, uncov_hi)
            if uncov_hi is None or uncov_hi > kept_hi:
                trunc_right = True
                wmax_right = max(wmax_right, width)
            for s in range(s0, kept_hi + 1):
                if not coords.covers_interval(a + s, b + s):
                    kept.append((p, a + s, b + s))
        else:
            uncov_lo = None if coords.left_ray is None else coords.left_ray - b + 1
            if uncov_lo is not None and uncov_lo > s0:
                continue
            s_col = col_left - a
            kept_lo = s_col if uncov_lo is None else max(s_col, uncov_lo)
            if uncov_lo is None or uncov_lo < kept_lo:
                trunc_left = True
                wmax_left = max(wmax_left, width)
            for s in range(kept_lo, s0 + 1):
                if not coords.covers_interval(a + s, b + s):
                    kept.append((p, a + s, b + s))

    return _Reduced(
        target_obs=tuple(t_obs),
        label_obs=tuple(finite + kept),
        coords=coords,
        trunc_left=trunc_left,
        trunc_right=trunc_right,
        col_left=col_left,
        col_right=col_right,
        wmax_left=wmax_left,
        wmax_right=wmax_right,
        target_fine=target_fine,
    )


def _coords_to_obs(coords: CoordinateSet, hull_lo: int, hull_hi: int) -> list[int]:
    """Reduce an exact coordinate set against a hull: points inside, nearest
    observed coordinate on each side outside (a ray reduces to its closest
    coordinate, which screens everything beyond it)."""
    inside = {c for c in coords.points if hull_lo <= c <= hull_hi}
    if coords.right_ray is not None and coords.right_ray <= hull_hi:
        inside.update(range(max(coords.right_ray, hull_lo), hull_hi + 1))
    if coords.left_ray is not None and coords.left_ray >= hull_lo:
        inside.update(range(hull_lo, min(coords.left_ray, hull_hi) + 1))
    right_cands = [c for c in coords.points if c > hull_hi]
    if coords.right_ray is not None:
        right_cands.append(max(coords.right_ray, hull_hi + 1))
    left_cands = [c for c in coords.points if c < hull_lo]
    if coords.left_ray is not None:
        left_cands.append(min(coords.left_ray, hull_lo - 1))
    out = sorted(inside)
    if right_cands:
        out.append(min(right_cands))
    if left_cands:
        out.insert(0, max(left_cands))
    return out


def _assemble_and_solve(m: MarkovMeasure, red: _Reduced,
                        reveals: list[tuple[int, int]]) -> float:
    obs: list[_Obs] = []
    windows = [(lo, hi) for _, lo, hi in red.target_obs]
    windows += [(lo, hi) for _, lo, hi in red.label_obs]
    windows += reveals
    hull_lo = min(lo for lo, _ in windows)
    hull_hi = max(hi for _, hi in windows)

    # fast path: fine targets and exact coordinates only
    if red.target_fine and not red.label_obs and not reveals:
        cond_coords = _coords_to_obs(red.coords, hull_lo, hull_hi)
        tcoords = sorted({c for _, lo, hi in red.target_obs for c in range(lo, hi + 1)})
        joint = sorted(set(tcoords) | set(cond_coords))
        return max(0.0, _marginal_entropy(m, joint) - _marginal_entropy(m, cond_coords))

    for p, lo, hi in red.target_obs:
        obs.append(_Obs(lo, hi, p._table, True))
    for p, lo, hi in red.label_obs:
        obs.append(_Obs(lo, hi, p._table, False))
    for lo, hi in reveals:
        for c in range(lo, hi + 1):
            obs.append(_Obs(c, c, None, False))
    for c in _coords_to_obs(red.coords, hull_lo, hull_hi):
        obs.append(_Obs(c, c, None, False))
    # dedupe identical conditioning observations
    seen = set()
    unique: list[_Obs] = []
    for o in obs:
        key = (o.lo, o.hi, id(o.table), o.target)
        if key in seen:
            continue
        seen.add(key)
        unique.append(o)
    return _problem_entropy(m, unique)


def conditional_entropy(m: MarkovMeasure,
                        targets: Sequence[tuple[PartitionLike, int]],
                        cond_labels: Sequence[tuple[PartitionLike, CoordinateSet]] = (),
                        cond_coords: CoordinateSet | None = None,
                        depth: int = DEFAULT_DEPTH) -> EntropyBracket:
    """Conditional entropy of joined partition labels given mixed conditioning.

    Parameters
    ----------
    targets : (partition, shift) pairs whose joined label at those shifts is
        the quantity whose entropy is taken.
    cond_labels : (partition, shift set) pairs; the labels of the partition
        observed at every shift in the set generate the conditioning algebra.
    cond_coords : exact symbol observations.
    depth : truncation depth for infinite coarse-label shift sets; irrelevant
        when the computation is exact.
    """
    if depth < 1:
        raise EntropyEngineError("depth must be >= 1")
    red = _reduce(m, targets, cond_labels, cond_coords, depth)
    if red is None:
        return EntropyBracket.point(0.0)
    if not (red.trunc_left or red.trunc_right):
        v = _assemble_and_solve(m, red, [])
        return EntropyBracket.point(v)
    upper = _assemble_and_solve(m, red, [])
    reveals: list[tuple[int, int]] = []
    if red.trunc_right:
        reveals.append((red.col_right - red.wmax_right + 1, red.col_right))
    if red.trunc_left:
        reveals.append((red.col_left, red.col_left + red.wmax_left - 1))
    lower = _assemble_and_solve(m, red, reveals)
    return EntropyBracket(min(lower, upper), upper)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def entropy(P: CoordinatePartition, m: MarkovMeasure) -> float:
    """Shannon entropy of the label distribution, in nats."""
    return -sum(_plogp(p) for p in P.label_distribution(m).values())


def cond_entropy(P: CoordinatePartition, S: CoordinateSet, m: MarkovMeasure,
                 depth: int = DEFAULT_DEPTH) -> EntropyBracket:
    """H(P | exact symbols on S).  Exact for coordinate-set conditioning:
    the law of the window block given S depends only on the coordinates of S
    inside the window and the nearest observed coordinate on each side."""
    return conditional_entropy(m, [(P, 0)], cond_coords=S, depth=depth)


def process_entropy(P: CoordinatePartition, m: MarkovMeasure,
                    depth: int = DEFAULT_DEPTH) -> EntropyBracket:
    """H(P | its own forward label process), the per-step entropy of P.

    Exact for fine partitions (it then equals the entropy rate of the chain);
    bracketed for coarse labelings, with the bracket width reported through
    the returned interval.
    """
    return conditional_entropy(m, [(P, 0)],
                               cond_labels=[(P, CoordinateSet.right_of(1))],
                               depth=depth)


def pinsker_residual(P: CoordinatePartition, Q: CoordinatePartition,
                     m: MarkovMeasure, depth: int = DEFAULT_DEPTH) -> EntropyBracket:
    """Residual of the joint-process entropy identity

        H(Q v P | Q- v P-) - H(P | P-) - H(Q | Q- v P^T)

    where X- is the forward label process of X from shift 1 and P^T the label
    process over all shifts.  The bracket contains 0; it is exact (width 0)
    whenever every term is exact.
    """
    fwd = CoordinateSet.right_of(1)
    t1 = conditional_entropy(m, [(Q, 0), (P, 0)], [(Q, fwd), (P, fwd)], depth=depth)
    t2 = process_entropy(P, m, depth=depth)
    t3 = conditional_entropy(m, [(Q, 0)], [(Q, fwd), (P, CoordinateSet.everything())],
                             depth=depth)
    return t1 - t2 - t3


@dataclass(frozen=True)
class RefinementEntropyReport:
    """Result of the refinement-chain entropy comparison.

    For a two-element chain the identity
        H(P1|P1-) - H(P1|P2-) = H(P2|P1 v P2-) - H(P2|P1^T v P2-)
    holds and ``residual`` brackets lhs - rhs (contains 0).  For longer
    chains the difference H(P1|P1-) - H(P1|Pk-) is dominated by the sum of
    per-step differences and ``slack`` brackets rhs - lhs (nonnegative).
    """

    k: int
    lhs: EntropyBracket
    rhs: EntropyBracket
    residual: EntropyBracket | None
    slack: EntropyBracket | None


def refinement_entropy_check(chain: Sequence[CoordinatePartition], m: MarkovMeasure,
                             depth: int = DEFAULT_DEPTH) -> RefinementEntropyReport:
    """Entropy comparison along a refinement chain P1 < P2 < ... < Pk."""
    k = len(chain)
    if k < 2:
        raise EntropyEngineError("need at least two partitions")
    for a, b in zip(chain, chain[1:]):
        if not refines(b, a):
            raise EntropyEngineError("chain is not increasing in refinement")
    fwd = CoordinateSet.right_of(1)
    if k == 2:
        p1, p2 = chain
        lhs = process_entropy(p1, m, depth) - conditional_entropy(
            m, [(p1, 0)], [(p2, fwd)], depth=depth)
        rhs = conditional_entropy(
            m, [(p2, 0)], [(p1, CoordinateSet.of(0)), (p2, fwd)], depth=depth
        ) - conditional_entropy(
            m, [(p2, 0)], [(p1, CoordinateSet.everything()), (p2, fwd)], depth=depth)
        return RefinementEntropyReport(k, lhs, rhs, residual=lhs - rhs, slack=None)
    lhs = process_entropy(chain[0], m, depth) - conditional_entropy(
        m, [(chain[0], 0)], [(chain[-1], fwd)], depth=depth)
    rhs = EntropyBracket.point(0.0)
    for pi_, pj in zip(chain, chain[1:]):
        rhs = rhs + (process_entropy(pi_, m, depth) - conditional_entropy(
            m, [(pi_, 0)], [(pj, fwd)], depth=depth))
    return RefinementEntropyReport(k, lhs, rhs, residual=None, slack=rhs - lhs)
