"""Split the data at the interior knots of a regular position vector."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .positions import is_regular


@dataclass(frozen=True)
class Segment:
    """Inclusive abscissa index range plus the data knots strictly inside it."""

    lo: int
    hi: int
    data_knots: tuple = ()

    def __len__(self):
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class Segmentation:
    segments: tuple
    # interior knot l lies in (x[gaps[l]], x[gaps[l] + 1])
    gaps: tuple

    @property
    def r(self) -> int:
        return len(self.gaps)

    def encode(self) -> tuple:
        """Rebuild the position vector."""
        codes = []
        for l, seg in enumerate(self.segments):
            if l > 0:
                codes.append(2 * self.gaps[l - 1])
            codes.extend(2 * i - 1 for i in seg.data_knots)
        return tuple(codes)


def segmentize(p: Sequence[int], mu: int) -> Segmentation:
    """Segments ``S_0..S_r`` induced by the regular vector ``p``.

    Each even component ``2i`` closes a segment after ``x_i``; odd
    components become data knots of the segment they fall in.
    """
    if not is_regular(p, mu):
        raise ValueError(f"{tuple(p)} is not a regular position vector for mu={mu}")
    segments = []
    gaps = []
    lo = 0
    knots = []
    for c in p:
        if c % 2:
            knots.append((c + 1) // 2)
        else:
            i = c // 2
            segments.append(Segment(lo, i, tuple(knots)))
            gaps.append(i)
            lo, knots = i + 1, []
    segments.append(Segment(lo, mu + 1, tuple(knots)))
    for seg in segments:
        if seg.hi <= seg.lo:
            raise AssertionError(f"degenerate segment {seg} for regular {tuple(p)}")
    return Segmentation(tuple(segments), tuple(gaps))
