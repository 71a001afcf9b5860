"""Rate-region geometry in the (R1, R2) plane.

A single parameter choice yields a "pentagon": the polygon
{0 <= R1 <= b1, 0 <= R2 <= b2, R1 + R2 <= bsum}.  Rate regions are unions
of pentagons over a parameter grid; their Pareto frontier is represented
as a sampled upper envelope at fixed R1 abscissas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np


class RatePoint2(NamedTuple):
    r1: float
    r2: float


@dataclass(frozen=True)
class MaccmBounds:
    """Four rate caps of a common-message region: R1, R2, R1+R2, R0+R1+R2."""

    a1: float
    a2: float
    a12: float
    atot: float

    def __post_init__(self):
        for name in ("a1", "a2", "a12", "atot"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class MacceBounds:
    """Four rate caps of a conferencing region.

    b1, b2 cap the individual rates, bsum_conf is the conferencing-augmented
    sum cap and bsum_tot the total-cooperation sum cap; the effective sum
    constraint is min(bsum_conf, bsum_tot).
    """

    b1: float
    b2: float
    bsum_conf: float
    bsum_tot: float

    def __post_init__(self):
        for name in ("b1", "b2", "bsum_conf", "bsum_tot"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class Pentagon:
    b1: float
    b2: float
    bsum: float
    vertices: tuple[RatePoint2, ...]


@dataclass
class Frontier2:
    """Sampled Pareto frontier: r1 strictly increasing, r2 nonincreasing.

    params[i] is the parameter tuple of the pentagon attaining points[i];
    ties are broken toward the lexicographically smallest tuple.
    """

    r1: np.ndarray
    r2: np.ndarray
    params: list[tuple] = field(default_factory=list)

    def __len__(self):
        return len(self.r1)

    def points(self) -> list[RatePoint2]:
        return [RatePoint2(float(a), float(b)) for a, b in zip(self.r1, self.r2)]


def make_pentagon(b1: float, b2: float, bsum: float) -> Pentagon:
    """Vertex realization of {0 <= R1 <= b1, 0 <= R2 <= b2, R1+R2 <= bsum}.

    Vertices start at the origin and walk the boundary counterclockwise.
    Degenerate inputs (zero caps) collapse to segments or a single point.
    """
    for name, v in (("b1", b1), ("b2", b2), ("bsum", bsum)):
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"{name} must be finite and >= 0, got {v}")
    cand = [(0.0, 0.0), (min(b1, bsum), 0.0)]
    if bsum >= b1 + b2:
        cand.append((b1, b2))
    else:
        if bsum >= b1:
            cand.append((b1, bsum - b1))
        if bsum >= b2:
            cand.append((bsum - b2, b2))
    cand.append((0.0, min(b2, bsum)))
    verts: list[RatePoint2] = []
    for p in cand:
        if all(p != q for q in verts):
            verts.append(RatePoint2(*p))
    return Pentagon(b1=b1, b2=b2, bsum=bsum, vertices=tuple(verts))


def pentagon_contains(p: Pentagon, q, tol: float = 0.0) -> bool:
    """True iff q satisfies every constraint of p within additive slack tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    r1, r2 = q
    return (
        r1 >= -tol
        and r2 >= -tol
        and r1 <= p.b1 + tol
        and r2 <= p.b2 + tol
        and r1 + r2 <= p.bsum + tol
    )


class EnvelopeAccumulator:
    """Streaming upper envelope of pentagon profiles at fixed abscissas.

    Batches must arrive in ascending lexicographic order of their parameter
    tuples; the envelope keeps, per abscissa, the maximum feasible r2 and
    the first (hence lexicographically smallest) tuple attaining it.  The
    result is independent of how the cells are split into batches.
    """

    # elements per temporary matrix; keeps peak memory around 32 MB
    _CHUNK = 4_000_000

    def __init__(self, abscissas: np.ndarray):
        self.r1 = np.asarray(abscissas, dtype=float)
        self._best = np.full(self.r1.shape, -np.inf)
        self._tuples: list = [None] * len(self.r1)

    def update(self, b1, b2, bsum, tuple_at: Callable[[int], tuple]):
        b1 = np.asarray(b1, dtype=float)
        b2 = np.asarray(b2, dtype=float)
        bsum = np.asarray(bsum, dtype=float)
        n = len(b1)
        step = max(1, self._CHUNK // max(len(self.r1), 1))
        for lo in range(0, n, step):
            hi = min(lo + step, n)
            m1 = np.minimum(b1[lo:hi], bsum[lo:hi])
            r2 = np.minimum(b2[lo:hi], bsum[lo:hi] - self.r1[:, None])
            r2[self.r1[:, None] > m1] = -np.inf
            cmax = r2.max(axis=1)
            carg = r2.argmax(axis=1)  # first max = lex-min within the chunk
            better = cmax > self._best
            for k in np.nonzero(better)[0]:
                self._best[k] = cmax[k]
                self._tuples[k] = tuple_at(lo + int(carg[k]))

    def finish(self) -> Frontier2:
        keep = np.isfinite(self._best)
        return Frontier2(
            r1=self.r1[keep],
            r2=self._best[keep],
            params=[t for t, k in zip(self._tuples, keep) if k],
        )


def envelope_abscissas(r1_max: float, resolution: int) -> np.ndarray:
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if r1_max <= 0:
        return np.array([0.0])
    return np.linspace(0.0, r1_max, resolution)


def frontier_union(
    pentagons: Sequence[tuple[Pentagon, tuple]],
    resolution: int = 512,
    r1_max: float | None = None,
) -> Frontier2:
    """Upper envelope of a pentagon union, sampled at `resolution` abscissas.

    Abscissas span [0, max achievable r1] unless r1_max overrides the span.
    Output is independent of the input order: pentagons are sorted by their
    parameter tuple and ties keep the lexicographically smallest one.
    """
    if not pentagons:
        raise ValueError("pentagon list must be nonempty")
    items = sorted(pentagons, key=lambda it: (it[1], it[0].b1, it[0].b2, it[0].bsum))
    b1 = np.array([p.b1 for p, _ in items])
    b2 = np.array([p.b2 for p, _ in items])
    bs = np.array([p.bsum for p, _ in items])
    if r1_max is None:
        r1_max = float(np.max(np.minimum(b1, bs)))
    acc = EnvelopeAccumulator(envelope_abscissas(r1_max, resolution))
    acc.update(b1, b2, bs, lambda i: items[i][1])
    return acc.finish()


def frontier_gap(fa: Frontier2, fb: Frontier2) -> float:
    """sup over fa's abscissas of fa.r2 minus fb's interpolated r2.

    Positive means fa pokes above fb somewhere; fb is interpolated linearly
    between its points and treated as r2 = 0 beyond its largest r1.
    """
    if len(fa) == 0 or len(fb) == 0:
        raise ValueError("both frontiers must be nonempty")
    interp = np.interp(fa.r1, fb.r1, fb.r2, right=0.0)
    return float(np.max(fa.r2 - interp))
