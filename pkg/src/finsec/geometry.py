"""Circular arcs, arc curves, winding numbers, and the lentiform domain.

The basic object is the circular arc A_s(z1, z2) joining two points of the
complex plane: the set of points z (plus the endpoints themselves) at which

    arg((z - z1)/(z - z2))  =  2*pi/s   (mod 2*pi),      s in (1, oo).

For s = 2 the arc is the straight segment [z1, z2]; for s > 2 it bulges to
the right of the oriented line z1 -> z2, for s < 2 to the left.  The arc is
parametrized by

    z(mu) = z1*(1 - f_s(mu)) + z2*f_s(mu),   mu in [0, 1],

with the interpolation function ``f_param`` below.  Unions of such arcs over
a band of parameters produce the lentiform region L_p anchored at 0 and 1,
which plays the role of the spectral region for half-line Cauchy projections
on L^p.  Closed chains of arcs carry an orientation and a winding number
about the origin; the winding number is the quantity consumed by the
one-sided invertibility tests in :mod:`finsec.analyzer`.

All tolerances are in euclidean distance in the plane.  Angular deviations
are converted to distances through the local gradient of the angle function,
so membership tests behave uniformly along an arc.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CircularArc",
    "ArcCurve",
    "LensDomain",
    "CurveThroughOrigin",
    "f_param",
    "arc_point",
    "arc_points",
    "arc_contains",
    "lens_contains",
    "lens_boundary",
    "triple_curve",
    "two_point_curve",
    "reverse_curve",
    "winding_about_origin",
]

DEFAULT_TOL = 1e-9

_TWO_PI = 2.0 * math.pi


class CurveThroughOrigin(Exception):
    """The sampled curve comes closer to the origin than the tolerance.

    Winding about the origin is undefined; callers treat this as failure
    of whatever criterion required the winding number.
    """

    def __init__(self, min_modulus: float):
        super().__init__(f"curve passes within {min_modulus:.3e} of the origin")
        self.min_modulus = min_modulus


def f_param(s: float, mu: float) -> complex:
    """Arc interpolation f_s(mu).

    Equals mu on the segment branch s = 2 and

        sin(pi*mu - 2*pi*mu/s) / sin(pi - 2*pi/s) * exp(i*(pi - 2*pi/s)*(mu - 1))

    otherwise.  Endpoint values f_s(0) = 0 and f_s(1) = 1 hold on both
    branches, and the s -> 2 limit agrees with mu.
    """
    if not s > 1.0:
        raise ValueError(f"arc parameter must satisfy s > 1, got {s}")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"arc coordinate must lie in [0, 1], got {mu}")
    if s == 2.0:
        return complex(mu)
    gamma = math.pi - _TWO_PI / s
    return (math.sin(math.pi * mu - _TWO_PI * mu / s) / math.sin(gamma)) * cmath.exp(
        1j * gamma * (mu - 1.0)
    )


def _f_param_vec(s: float, mu: np.ndarray) -> np.ndarray:
    if s == 2.0:
        return mu.astype(complex)
    gamma = math.pi - _TWO_PI / s
    return (np.sin(math.pi * mu - _TWO_PI * mu / s) / math.sin(gamma)) * np.exp(
        1j * gamma * (mu - 1.0)
    )


@dataclass(frozen=True)
class CircularArc:
    """Oriented circular arc A_s(z1, z2); degenerates to {z1} when z1 == z2."""

    z1: complex
    z2: complex
    s: float

    def __post_init__(self):
        if not self.s > 1.0:
            raise ValueError(f"arc parameter must satisfy s > 1, got {self.s}")

    @property
    def degenerate(self) -> bool:
        return self.z1 == self.z2

    def point(self, mu: float) -> complex:
        return arc_point(self, mu)

    def points(self, mus: np.ndarray) -> np.ndarray:
        return arc_points(self, mus)

    def reversed(self) -> "CircularArc":
        # A_s(z1, z2) traversed backwards is A_{s'}(z2, z1) with the
        # conjugate parameter s' = s/(s-1): same point set, opposite run.
        return CircularArc(self.z2, self.z1, self.s / (self.s - 1.0))


def arc_point(arc: CircularArc, mu: float) -> complex:
    """Point on the arc at parameter mu; mu=0 gives z1, mu=1 gives z2."""
    if arc.degenerate:
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"arc coordinate must lie in [0, 1], got {mu}")
        return arc.z1
    f = f_param(arc.s, mu)
    return arc.z1 * (1.0 - f) + arc.z2 * f


def arc_points(arc: CircularArc, mus: np.ndarray) -> np.ndarray:
    """Vectorized :func:`arc_point` over an array of parameters."""
    mus = np.asarray(mus, dtype=float)
    if arc.degenerate:
        return np.full(mus.shape, arc.z1, dtype=complex)
    f = _f_param_vec(arc.s, mus)
    return arc.z1 * (1.0 - f) + arc.z2 * f


def arc_contains(arc: CircularArc, z: complex, tol: float = DEFAULT_TOL) -> bool:
    """Whether z lies within distance ``tol`` of the arc's point set.

    Uses the defining angle relation rather than circle-center
    reconstruction.  The angular residual is converted to a distance via
    |grad arg((z-z1)/(z-z2))| = |z1-z2| / (|z-z1| |z-z2|), which keeps the
    test well conditioned as s -> 2 and near the endpoints.
    """
    if abs(z - arc.z1) <= tol or abs(z - arc.z2) <= tol:
        return True
    if arc.degenerate:
        return False
    w = (z - arc.z1) / (z - arc.z2)
    delta = (cmath.phase(w) - _TWO_PI / arc.s) % _TWO_PI
    if delta > math.pi:
        delta -= _TWO_PI
    scale = abs(arc.z1 - arc.z2) / (abs(z - arc.z1) * abs(z - arc.z2))
    return abs(delta) <= tol * scale


@dataclass(frozen=True)
class ArcCurve:
    """Closed oriented chain of circular arcs.

    Each arc's terminal point must coincide with the next arc's initial
    point, and the last arc closes back to the first (within 1e-12,
    relative to the curve's size).
    """

    arcs: tuple[CircularArc, ...]

    def __post_init__(self):
        if not self.arcs:
            raise ValueError("an arc curve needs at least one arc")
        scale = max(1.0, max(max(abs(a.z1), abs(a.z2)) for a in self.arcs))
        for a, b in zip(self.arcs, self.arcs[1:] + self.arcs[:1]):
            if abs(a.z2 - b.z1) > 1e-12 * scale:
                raise ValueError(
                    f"arc chain does not close: {a.z2} != {b.z1}"
                )

    @property
    def degenerate(self) -> bool:
        return all(a.degenerate for a in self.arcs)


def two_point_curve(p: float, a: complex, b: complex) -> ArcCurve:
    """Closed curve A_p(a, b) followed by A_p(b, a)."""
    return ArcCurve((CircularArc(a, b, p), CircularArc(b, a, p)))


def triple_curve(p: float, z1: complex, z2: complex, z3: complex) -> ArcCurve:
    """Closed oriented curve through z1 -> z2 -> z3 -> z1 along p-arcs.

    Degenerates to a point curve when z1 == z2 == z3; that curve has
    winding number zero by convention.
    """
    if not p > 1.0:
        raise ValueError(f"exponent must satisfy p > 1, got {p}")
    return ArcCurve(
        (
            CircularArc(z1, z2, p),
            CircularArc(z2, z3, p),
            CircularArc(z3, z1, p),
        )
    )


def reverse_curve(curve: ArcCurve) -> ArcCurve:
    """Same point set traversed in the opposite direction."""
    return ArcCurve(tuple(a.reversed() for a in reversed(curve.arcs)))


def winding_about_origin(
    curve: ArcCurve, min_modulus_tol: float = DEFAULT_TOL
) -> int:
    """Winding number of a closed arc curve about 0.

    Each arc is sampled adaptively (doubling until consecutive argument
    steps stay below pi/4, after which unwrapping is exact for these smooth
    arcs) and the total argument increment is accumulated.  Degenerate
    point curves return 0.

    Raises :class:`CurveThroughOrigin` if the sampled curve approaches the
    origin closer than ``min_modulus_tol``.
    """
    if curve.degenerate:
        return 0
    total = 0.0
    min_mod = math.inf
    for arc in curve.arcs:
        if arc.degenerate:
            min_mod = min(min_mod, abs(arc.z1))
            continue
        m = 33
        while True:
            pts = arc_points(arc, np.linspace(0.0, 1.0, m))
            mods = np.abs(pts)
            min_mod = min(min_mod, float(mods.min()))
            if min_mod < min_modulus_tol:
                raise CurveThroughOrigin(min_mod)
            args = np.angle(pts)
            steps = np.diff(args)
            steps = (steps + math.pi) % _TWO_PI - math.pi
            if np.abs(steps).max() < math.pi / 4.0 or m >= 1 << 16:
                total += float(steps.sum())
                break
            m = 2 * m - 1
    if min_mod < min_modulus_tol:
        raise CurveThroughOrigin(min_mod)
    wind = total / _TWO_PI
    nearest = round(wind)
    if abs(wind - nearest) >= 0.1:
        raise CurveThroughOrigin(min_mod)
    return int(nearest)


@dataclass(frozen=True)
class LensDomain:
    """Lentiform region L_p: union of arcs A_s(0, 1) over s between p and q.

    q is the conjugate exponent p/(p-1); the parameter band is
    I_p = [min(p,q), max(p,q)].  L_p and L_q describe the same point set,
    and since 2 always lies in I_p the segment [0, 1] is always included.
    """

    p: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"exponent must satisfy p > 1, got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def s_interval(self) -> tuple[float, float]:
        return (min(self.p, self.q), max(self.p, self.q))

    def contains(self, z: complex, tol: float = DEFAULT_TOL) -> bool:
        return lens_contains(self.p, z, tol)

    def boundary(self) -> ArcCurve:
        return lens_boundary(self.p)

    def grid(self, n_s: int = 24, n_mu: int = 65) -> np.ndarray:
        """Covering point cloud of the region along its defining arcs."""
        smin, smax = self.s_interval
        pts = []
        for s in np.linspace(smin, smax, n_s):
            arc = CircularArc(0.0, 1.0, max(s, 1.0 + 1e-12))
            pts.append(arc_points(arc, np.linspace(0.0, 1.0, n_mu)))
        return np.unique(np.concatenate(pts))


def lens_contains(p: float, z: complex, tol: float = DEFAULT_TOL) -> bool:
    """Closed-form membership test for the lentiform region.

    z in {0, 1} passes outright; otherwise theta = arg(z/(z-1)) normalized
    to (0, 2*pi) must fall in [2*pi/max(p,q), 2*pi/min(p,q)].  The boundary
    tolerance is a distance, converted to an angle through the local
    gradient |z| |z-1| of the level sets.
    """
    if not p > 1.0:
        raise ValueError(f"exponent must satisfy p > 1, got {p}")
    if abs(z) <= tol or abs(z - 1.0) <= tol:
        return True
    q = p / (p - 1.0)
    smin, smax = min(p, q), max(p, q)
    theta = cmath.phase(z / (z - 1.0)) % _TWO_PI
    band = tol / (abs(z) * abs(z - 1.0))
    return _TWO_PI / smax - band <= theta <= _TWO_PI / smin + band


def lens_boundary(p: float) -> ArcCurve:
    """Positively oriented boundary of L_p.

    Runs from 0 to 1 along the arc with parameter max(p,q) and back along
    the conjugate arc; the two arcs coincide when p = 2 and the region
    collapses to the segment [0, 1].
    """
    if not p > 1.0:
        raise ValueError(f"exponent must satisfy p > 1, got {p}")
    q = p / (p - 1.0)
    smax = max(p, q)
    return ArcCurve((CircularArc(0.0, 1.0, smax), CircularArc(1.0, 0.0, smax)))
