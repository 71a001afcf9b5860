"""Reduction from conferencing encoders to a common-message problem.

Before transmission each encoder pushes part of its message through the
noise-free conference links (capacities c12, c21); the exchanged parts form
a common message and the leftovers stay private.  This turns every
common-message bound set into a conferencing bound set by simple capacity
additions, which is what `macce_from_maccm` implements.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import MaccmBounds, MacceBounds


@dataclass(frozen=True)
class RateSplit:
    """How a rate pair splits into conference-shared and private parts."""

    r1hat: float
    r2hat: float
    r0: float
    r1prime: float
    r2prime: float


@dataclass(frozen=True)
class CellPartition:
    """Deterministic partition of a message set into equal contiguous cells."""

    total: int
    cells: int
    assignment: dict[int, tuple[int, int]]

    def message_of(self, cell: int, index: int) -> int:
        block = self.total // self.cells
        return (cell - 1) * block + index


def split_rates(r1: float, r2: float, c12: float, c21: float) -> RateSplit:
    """Split each rate at its conference-link capacity.

    The shared parts min(r_i, c_ij) merge into the common rate r0; the
    residuals remain private.  r0 + r1prime + r2prime = r1 + r2 exactly.
    """
    if min(r1, r2, c12, c21) < 0:
        raise ValueError("rates and capacities must be >= 0")
    r1hat = min(r1, c12)
    r2hat = min(r2, c21)
    return RateSplit(
        r1hat=r1hat,
        r2hat=r2hat,
        r0=r1hat + r2hat,
        r1prime=r1 - r1hat,
        r2prime=r2 - r2hat,
    )


def admissible(log_sizes_1, log_sizes_2, n: int, c12: float, c21: float) -> bool:
    """Whether a conference fits its links: sum of log alphabet sizes per
    direction must not exceed n times the link capacity."""
    if n < 1:
        raise ValueError("block length n must be >= 1")
    if any(v < 0 for v in log_sizes_1) or any(v < 0 for v in log_sizes_2):
        raise ValueError("log alphabet sizes must be >= 0")
    return sum(log_sizes_1) <= n * c12 and sum(log_sizes_2) <= n * c21


def partition_messages(total: int, cells: int) -> CellPartition:
    """Contiguous-block partition of messages 1..total into equal cells.

    Message m goes to cell ceil(m / (total/cells)) with within-cell index
    ((m-1) mod (total/cells)) + 1.
    """
    if total < 1 or cells < 1:
        raise ValueError("total and cells must be >= 1")
    if total % cells != 0:
        raise ValueError(f"cells = {cells} does not divide total = {total}")
    block = total // cells
    assignment = {m: ((m - 1) // block + 1, (m - 1) % block + 1) for m in range(1, total + 1)}
    return CellPartition(total=total, cells=cells, assignment=assignment)


def macce_from_maccm(m: MaccmBounds, c12: float, c21: float) -> MacceBounds:
    """Turn common-message caps into conferencing caps.

    Eliminating the shared-rate variables from the split system leaves the
    individual and sum caps raised by the link capacities, while the total
    cap is untouched (conferencing cannot beat full cooperation).
    """
    if c12 < 0 or c21 < 0:
        raise ValueError("capacities must be >= 0")
    return MacceBounds(
        b1=m.a1 + c12,
        b2=m.a2 + c21,
        bsum_conf=m.a12 + c12 + c21,
        bsum_tot=m.atot,
    )
