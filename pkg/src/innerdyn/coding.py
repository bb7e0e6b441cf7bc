"""Markov partition of the circle from a boundary fixed point, and the coding.

The preimages of a boundary fixed point p cut the circle into d half-open
arcs, each mapped bijectively onto the circle minus p. Itineraries over the
arc labels 1..d code circle points; half-open membership gives every point
off a finite exceptional set exactly one code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blaschke import BlaschkeMap, angle_map, boundary_preimages, circle_abs_deriv
from .circle import TWO_PI, Arc, as_angle, wrap_angle
from .errors import ExceptionalPoint, NotFixed

_ENDPOINT_TOL = 1e-12

Word = tuple  # letters are 1-based ints

def word_to_str(w) -> str:
    return ",".join(str(int(a)) for a in w)


def word_from_str(s: str) -> Word:
    return tuple(int(tok) for tok in s.split(",") if tok.strip())


@dataclass(frozen=True)
class MarkovPartition:
    """d half-open arcs between consecutive preimages of a fixed point p.

    cuts holds the lifted endpoints: cuts[0] = p <= cuts[1] < ... and
    cuts[d] = p + 2*pi, so arc i (1-based) is [cuts[i-1], cuts[i]) in the
    lifted coordinate.
    """

    map: BlaschkeMap
    base_point: float
    cuts: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.cuts) - 1

    def arcs(self) -> list[Arc]:
        return [Arc.from_endpoints(self.cuts[i], wrap_angle(self.cuts[i + 1]))
                for i in range(self.degree)]

    def lift(self, theta) -> np.ndarray:
        """Representative of theta in [p, p + 2*pi)."""
        p = self.base_point
        return p + wrap_angle(np.asarray(theta, dtype=float) - p)

    def letter(self, theta):
        """1-based arc index containing theta (half-open convention)."""
        lifted = self.lift(theta)
        idx = np.searchsorted(self.cuts, lifted, side="right")
        return np.clip(idx, 1, self.degree).astype(int) if np.ndim(theta) else \
            int(min(max(idx, 1), self.degree))

    def endpoint_distance(self, theta) -> float:
        lifted = float(self.lift(theta))
        d = np.min(np.abs(self.cuts - lifted))
        return float(min(d, TWO_PI - abs(lifted - self.base_point)))


def build_partition(F: BlaschkeMap, p) -> MarkovPartition:
    """Partition arcs from the boundary fixed point p (counterclockwise)."""
    if F.degree < 2:
        raise ValueError("partitions need degree >= 2")
    p = as_angle(p)
    image = angle_map(F, p)
    gap = abs(np.exp(1j * image) - np.exp(1j * p))
    if gap > 1e-10:
        raise NotFixed(f"|F(p) - p| = {gap:.2e} exceeds 1e-10")
    pre = boundary_preimages(F, p)
    lifted = np.sort(p + wrap_angle(pre - p))
    # p itself is a preimage; snap the numerically smallest cut onto p exactly
    if abs(lifted[0] - p) > 1e-9 and abs(lifted[-1] - (p + TWO_PI)) < 1e-9:
        lifted = np.concatenate([[p], lifted[:-1]])
    lifted[0] = p
    cuts = np.concatenate([lifted, [p + TWO_PI]])
    return MarkovPartition(map=F, base_point=float(p), cuts=cuts)


def encode(P: MarkovPartition, x, depth: int) -> Word:
    """Arc itinerary of x under the first `depth` iterates.

    Raises ExceptionalPoint when the orbit passes within 1e-12 of an arc
    endpoint, where the coding is ambiguous.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    y = as_angle(x)
    letters = []
    for _ in range(depth):
        if P.endpoint_distance(y) < _ENDPOINT_TOL:
            raise ExceptionalPoint(f"orbit hits a partition endpoint at angle {y}")
        letters.append(P.letter(y))
        y = float(angle_map(P.map, y))
    return tuple(letters)


def _branch_pull(P: MarkovPartition, letter: int, tau: float) -> float:
    """Inverse branch into arc `letter`, in the lifted coordinate [p, p+2pi].

    The branch maps the lifted circle [p, p+2pi] increasingly onto
    [cuts[letter-1], cuts[letter]]; endpoints go to endpoints.
    """
    p = P.base_point
    if tau <= p + 1e-14:
        return float(P.cuts[letter - 1])
    if tau >= p + TWO_PI - 1e-14:
        return float(P.cuts[letter])
    pre = boundary_preimages(P.map, wrap_angle(tau))
    lifted = p + wrap_angle(pre - p)
    lo, hi = P.cuts[letter - 1], P.cuts[letter]
    inside = lifted[(lifted > lo - 1e-13) & (lifted < hi + 1e-13)]
    if len(inside) == 0:
        raise ExceptionalPoint(f"no preimage of {tau} inside arc {letter}")
    return float(np.clip(inside[0], lo, hi))


def cylinder_arc(P: MarkovPartition, w: Word) -> Arc:
    """The arc of points whose itinerary starts with w.

    Computed by pulling the base arc of the last letter back through the
    inverse branches of the earlier letters; diameters shrink geometrically
    because the map is uniformly expanding on the circle.
    """
    if len(w) == 0:
        raise ValueError("word must be nonempty")
    for a in w:
        if not 1 <= a <= P.degree:
            raise ValueError(f"letter {a} outside 1..{P.degree}")
    lo = float(P.cuts[w[-1] - 1])
    hi = float(P.cuts[w[-1]])
    for letter in reversed(w[:-1]):
        lo = _branch_pull(P, letter, lo)
        hi = _branch_pull(P, letter, hi)
    return Arc(wrap_angle(lo), hi - lo)


def cylinder_point(P: MarkovPartition, w: Word, target) -> float:
    """The unique y in the cylinder [w] with F^{|w|}(y) = target (angle)."""
    tau = float(P.lift(as_angle(target)))
    if tau <= P.base_point + 1e-14:
        tau += TWO_PI * 0.0  # left endpoint is a valid lifted coordinate
    cur = tau
    for letter in reversed(w):
        cur = _branch_pull(P, letter, cur)
    return float(wrap_angle(cur))


def cylinder_weight(P: MarkovPartition, w: Word, target) -> float:
    """1 / |(F^{|w|})'(y)| at the cylinder's preimage y of the target angle."""
    y = cylinder_point(P, w, target)
    F = P.map
    total = 1.0
    cur = y
    for _ in range(len(w)):
        total *= float(circle_abs_deriv(F, cur))
        cur = float(angle_map(F, cur))
    return 1.0 / total
