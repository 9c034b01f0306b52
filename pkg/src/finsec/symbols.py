"""Step functions, slowly oscillating generators, and composite symbols.

A symbol here is a finite sum of terms, each a piecewise-constant function
of the real line multiplied by a product of slowly oscillating (SO)
generators.  Step functions capture the piecewise-continuous part: finitely
many jumps, well-defined one-sided limits everywhere including +-infinity.
SO generators are bounded continuous functions whose oscillation over the
dyadic annuli [x, 2x] u [-2x, -x] dies out at infinity; they carry a
declared cluster set describing their partial limits at infinity.

The composite class :class:`PCSOSymbol` supports pointwise evaluation,
one-sided limits, algebra (sums and products stay in the class), reflection
x -> -x, and evaluation "through a fiber": an assignment eta of cluster
values to the generators in play turns a symbol b into the pair of numbers
b_eta(-oo), b_eta(+oo) and the two-piece step function
gamma_eta(b) = b_eta(-oo)*chi_- + b_eta(+oo)*chi_+.
"""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "StepFunction",
    "ClusterSet",
    "PointCluster",
    "CircleCluster",
    "FiniteCluster",
    "SampledCluster",
    "SOGenerator",
    "PCSOSymbol",
    "FiberAssignment",
    "MissingAssignment",
    "ValueOutsideCluster",
    "chi_plus",
    "chi_minus",
    "chi_interval",
    "constant_step",
    "so_constant",
    "so_with_limit",
    "so_sqrt_log",
    "so_phase",
    "sample_fibers",
    "so_oscillation",
]


class MissingAssignment(KeyError):
    """A fiber does not assign a generator that the symbol uses."""


class ValueOutsideCluster(ValueError):
    """A fiber assigns a value not in the generator's cluster set."""


# ---------------------------------------------------------------------------
# piecewise constant part
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """Piecewise constant function with finitely many jumps.

    ``values[i]`` is the value on the i-th interval of the partition
    (-oo, x_1), (x_1, x_2), ..., (x_n, +oo); there is exactly one more
    value than breakpoints.  Evaluation at a breakpoint returns the right
    limit (a measure-zero convention, irrelevant to every criterion).
    """

    breakpoints: tuple[float, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(complex(v) for v in self.values)
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(vals) != len(bp) + 1:
            raise ValueError(
                f"need {len(bp) + 1} values for {len(bp)} breakpoints, got {len(vals)}"
            )
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.values[bisect.bisect_right(self.breakpoints, float(t))]
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        return np.asarray(self.values, dtype=complex)[idx]

    def one_sided(self, eta: float) -> tuple[complex, complex]:
        """(value at eta-, value at eta+)."""
        left = self.values[bisect.bisect_left(self.breakpoints, eta)]
        right = self.values[bisect.bisect_right(self.breakpoints, eta)]
        return left, right

    def at_minus_inf(self) -> complex:
        return self.values[0]

    def at_plus_inf(self) -> complex:
        return self.values[-1]

    def min_abs(self) -> float:
        """Smallest modulus over all pieces (the essential infimum)."""
        return min(abs(v) for v in self.values)

    def is_constant(self, tol: float = 0.0) -> bool:
        return all(abs(v - self.values[0]) <= tol for v in self.values)

    # -- algebra (closed under +, *, scalar) --------------------------------

    def _merged(self, other: "StepFunction"):
        bp = sorted(set(self.breakpoints) | set(other.breakpoints))
        return bp

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            return StepFunction(self.breakpoints, tuple(v + other for v in self.values))
        bp = self._merged(other)
        vals = [self._piece(b) + other._piece(b) for b in _piece_probes(bp)]
        return StepFunction(tuple(bp), tuple(vals))

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return StepFunction(self.breakpoints, tuple(v * other for v in self.values))
        bp = self._merged(other)
        vals = [self._piece(b) * other._piece(b) for b in _piece_probes(bp)]
        return StepFunction(tuple(bp), tuple(vals))

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other):
        return self + (-1.0) * other if isinstance(other, StepFunction) else self + (-other)

    def _piece(self, probe) -> complex:
        # probe is either a float strictly inside a piece or +-inf
        if probe == -math.inf:
            return self.values[0]
        if probe == math.inf:
            return self.values[-1]
        return self(probe)

    def reflect(self) -> "StepFunction":
        """The step function x -> f(-x)."""
        bp = tuple(-b for b in reversed(self.breakpoints))
        return StepFunction(bp, tuple(reversed(self.values)))

    def shift(self, eta: float) -> "StepFunction":
        """The step function x -> f(eta + x)."""
        return StepFunction(tuple(b - eta for b in self.breakpoints), self.values)

    def restrict(self, lo: float, hi: float) -> "StepFunction":
        """Pieces relevant to the open interval (lo, hi); jumps outside dropped."""
        keep = [b for b in self.breakpoints if lo < b < hi]
        lo_f = lo if lo != -math.inf else (keep[0] if keep else hi) - 2.0
        hi_f = hi if hi != math.inf else (keep[-1] if keep else lo_f) + 2.0
        cuts = [lo_f] + keep + [hi_f]
        vals = [self(0.5 * (a + b)) for a, b in zip(cuts, cuts[1:])]
        return StepFunction(tuple(keep), tuple(vals))


def _piece_probes(bp: list[float]):
    """One probe point inside each piece of the partition induced by bp."""
    if not bp:
        return [0.0]
    probes = [-math.inf]
    probes += [0.5 * (a + b) for a, b in zip(bp, bp[1:])]
    probes.append(math.inf)
    return probes


chi_plus = StepFunction((0.0,), (0.0, 1.0))
chi_minus = StepFunction((0.0,), (1.0, 0.0))


def chi_interval(lo: float, hi: float) -> StepFunction:
    """Characteristic function of the interval (lo, hi)."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    if lo == -math.inf and hi == math.inf:
        return constant_step(1.0)
    if lo == -math.inf:
        return StepFunction((hi,), (1.0, 0.0))
    if hi == math.inf:
        return StepFunction((lo,), (0.0, 1.0))
    return StepFunction((lo, hi), (0.0, 1.0, 0.0))


def constant_step(c: complex) -> StepFunction:
    return StepFunction((), (c,))


# ---------------------------------------------------------------------------
# slowly oscillating generators and their cluster sets
# ---------------------------------------------------------------------------

class ClusterSet:
    """Partial-limit set of an SO generator at infinity."""

    def contains(self, v: complex, tol: float) -> bool:
        raise NotImplementedError

    def project(self, v: complex) -> complex:
        raise NotImplementedError

    def grid(self, resolution: int, gen: "SOGenerator | None" = None):
        raise NotImplementedError


@dataclass(frozen=True)
class PointCluster(ClusterSet):
    value: complex

    def __post_init__(self):
        if not cmath.isfinite(self.value):
            raise ValueError("point cluster needs a finite value")

    def contains(self, v, tol):
        return abs(v - self.value) <= tol

    def project(self, v):
        return self.value

    def grid(self, resolution, gen=None):
        return [complex(self.value)]


@dataclass(frozen=True)
class CircleCluster(ClusterSet):
    center: complex
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise ValueError("circle cluster needs a finite nonnegative radius")

    def contains(self, v, tol):
        return abs(abs(v - self.center) - self.radius) <= tol

    def project(self, v):
        d = v - self.center
        if d == 0:
            return self.center + self.radius
        return self.center + self.radius * d / abs(d)

    def grid(self, resolution, gen=None):
        ang = 2.0 * math.pi * np.arange(resolution) / resolution
        return [self.center + self.radius * cmath.exp(1j * a) for a in ang]


@dataclass(frozen=True)
class FiniteCluster(ClusterSet):
    points: tuple[complex, ...]

    def __post_init__(self):
        if not self.points or not all(cmath.isfinite(p) for p in self.points):
            raise ValueError("finite cluster needs finitely many finite points")

    def contains(self, v, tol):
        return any(abs(v - p) <= tol for p in self.points)

    def project(self, v):
        return min(self.points, key=lambda p: abs(v - p))

    def grid(self, resolution, gen=None):
        return list(self.points)


@dataclass(frozen=True)
class SampledCluster(ClusterSet):
    """Cluster values obtained by chasing the generator along tau_n -> oo."""

    tau0: float = 2.0
    rho: float = 1.5
    count: int = 64

    def __post_init__(self):
        if not (math.isfinite(self.tau0) and self.tau0 > 0 and self.rho > 1.0 and self.count >= 1):
            raise ValueError("sampled cluster needs tau0 > 0, rho > 1, count >= 1")

    def taus(self, resolution: int | None = None):
        n = self.count if resolution is None else resolution
        return self.tau0 * self.rho ** np.arange(n)

    def contains(self, v, tol):
        # decidable only relative to the declared grid
        return True

    def project(self, v):
        return v

    def grid(self, resolution, gen=None):
        if gen is None:
            raise ValueError("sampled cluster needs its generator to produce values")
        return [complex(gen.evaluator(t)) for t in self.taus(resolution)]


@dataclass(frozen=True)
class SOGenerator:
    """Named slowly oscillating function with a declared cluster set at oo.

    ``even`` marks generators with g(-x) = g(x); reflection then returns
    the generator itself, keeping fiber assignments consistent.
    """

    id: str
    evaluator: Callable[[float], complex] = field(compare=False)
    cluster: ClusterSet = field(compare=False)
    even: bool = field(default=False, compare=False)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return complex(self.evaluator(float(t)))
        t = np.asarray(t, dtype=float)
        return np.array([complex(self.evaluator(float(x))) for x in t])

    def reflect(self) -> "SOGenerator":
        if self.even:
            return self
        ev = self.evaluator
        return SOGenerator(self.id + "~", lambda t: ev(-t), self.cluster, even=False)

    def shift(self, eta: float) -> "SOGenerator":
        """The generator t -> g(eta + t); shifts preserve slow oscillation."""
        if eta == 0.0:
            return self
        ev = self.evaluator
        return SOGenerator(f"{self.id}@{eta:g}", lambda t: ev(eta + t),
                           self.cluster, even=False)

    def cluster_values(self, resolution: int) -> list[complex]:
        return self.cluster.grid(resolution, gen=self)


def so_constant(name: str, c: complex) -> SOGenerator:
    return SOGenerator(name, lambda t: complex(c), PointCluster(complex(c)), even=True)


def so_with_limit(name: str, func: Callable[[float], complex], limit: complex,
                  even: bool = False) -> SOGenerator:
    """Generator from a callable with a single limit at infinity."""
    return SOGenerator(name, func, PointCluster(complex(limit)), even=even)


def _gk_eval(k: int, t: float) -> complex:
    # t^2/(t^2+1) * exp(i*sqrt(log(t^(2k)+1))), overflow-safe for huge |t|
    t2 = t * t
    if t2 == 0.0:
        return 0.0
    mod = t2 / (t2 + 1.0) if math.isfinite(t2) else 1.0
    a = abs(t)
    if a <= 1.0:
        inner = math.log1p(a ** (2 * k))
    else:
        # log(t^(2k)+1) = 2k log|t| + log(1 + t^(-2k))
        inner = 2 * k * math.log(a) + math.log1p(a ** (-2.0 * k))
    return mod * cmath.exp(1j * math.sqrt(inner))


def so_sqrt_log(k: int) -> SOGenerator:
    """The oscillating generator t^2/(t^2+1) * exp(i sqrt(log(t^{2k}+1))).

    Even, modulus < 1 everywhere, no limit at infinity; its partial-limit
    set at infinity is the whole unit circle.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    return SOGenerator(f"g{k}", lambda t, k=k: _gk_eval(k, t),
                       CircleCluster(0.0, 1.0), even=True)


def so_phase(name: str, psi: Callable[[float], float],
             cluster: ClusterSet | None = None, even: bool = False) -> SOGenerator:
    """Unimodular generator exp(i psi(t)) with a sampled cluster by default."""
    c = cluster if cluster is not None else SampledCluster()
    return SOGenerator(name, lambda t: cmath.exp(1j * float(psi(t))), c, even=even)


def so_oscillation(gen: SOGenerator, x: float, samples: int = 64) -> float:
    """Oscillation of the generator over the dyadic annulus [x,2x] u [-2x,-x]."""
    ts = np.concatenate([np.linspace(x, 2 * x, samples), np.linspace(-2 * x, -x, samples)])
    vals = gen(ts)
    return float(np.abs(vals[:, None] - vals[None, :]).max())


# ---------------------------------------------------------------------------
# composite symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PCSOSymbol:
    """Finite sum of (step function) x (product of SO generators) terms."""

    terms: tuple[tuple[StepFunction, tuple[str, ...]], ...]
    generators: dict[str, SOGenerator] = field(default_factory=dict)

    def __post_init__(self):
        for step, ids in self.terms:
            for gid in ids:
                if gid not in self.generators:
                    raise MissingAssignment(f"unknown generator id {gid!r}")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def from_step(step: StepFunction) -> "PCSOSymbol":
        return PCSOSymbol(((step, ()),), {})

    @staticmethod
    def constant(c: complex) -> "PCSOSymbol":
        return PCSOSymbol.from_step(constant_step(c))

    @staticmethod
    def from_generator(gen: SOGenerator) -> "PCSOSymbol":
        return PCSOSymbol(((constant_step(1.0), (gen.id,)),), {gen.id: gen})

    # -- structure -----------------------------------------------------------

    @property
    def generator_ids(self) -> tuple[str, ...]:
        seen: list[str] = []
        for _, ids in self.terms:
            for gid in ids:
                if gid not in seen:
                    seen.append(gid)
        return tuple(seen)

    def is_pure_step(self) -> bool:
        return all(not ids for _, ids in self.terms)

    def as_step(self) -> StepFunction:
        if not self.is_pure_step():
            raise ValueError("symbol has SO factors; not a pure step function")
        acc = constant_step(0.0)
        for step, _ in self.terms:
            acc = acc + step
        return acc

    def constant_value(self) -> complex | None:
        """The constant this symbol equals, or None if not constant."""
        if not self.is_pure_step():
            return None
        step = self.as_step()
        return step.values[0] if step.is_constant() else None

    def jump_points(self) -> tuple[float, ...]:
        pts: set[float] = set()
        for step, _ in self.terms:
            pts.update(step.breakpoints)
        return tuple(sorted(pts))

    # -- evaluation ----------------------------------------------------------

    def __call__(self, t):
        if np.ndim(t) == 0:
            total = 0.0 + 0.0j
            for step, ids in self.terms:
                prod = step(float(t))
                for gid in ids:
                    prod *= self.generators[gid].evaluator(float(t))
                total += prod
            return total
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=complex)
        for step, ids in self.terms:
            prod = step(t).astype(complex)
            for gid in ids:
                prod *= self.generators[gid](t)
            total += prod
        return total

    def one_sided_limits(self, eta: float) -> tuple[complex, complex]:
        """(b(eta-), b(eta+)); SO factors contribute their value at eta."""
        left = 0.0 + 0.0j
        right = 0.0 + 0.0j
        for step, ids in self.terms:
            sl, sr = step.one_sided(eta)
            g = 1.0 + 0.0j
            for gid in ids:
                g *= self.generators[gid].evaluator(eta)
            left += sl * g
            right += sr * g
        return left, right

    def fiber_values(self, fiber: "FiberAssignment") -> tuple[complex, complex]:
        """(b_eta(-oo), b_eta(+oo)) for a fiber point eta over infinity."""
        lo = 0.0 + 0.0j
        hi = 0.0 + 0.0j
        for step, ids in self.terms:
            g = 1.0 + 0.0j
            for gid in ids:
                g *= fiber[gid]
            lo += step.at_minus_inf() * g
            hi += step.at_plus_inf() * g
        return lo, hi

    def gamma_eta(self, fiber: "FiberAssignment") -> StepFunction:
        """Two-piece step b_eta(-oo)*chi_- + b_eta(+oo)*chi_+."""
        lo, hi = self.fiber_values(fiber)
        return StepFunction((0.0,), (lo, hi))

    # -- algebra ---------------------------------------------------------------

    def _merge_gens(self, other: "PCSOSymbol") -> dict[str, SOGenerator]:
        gens = dict(self.generators)
        for gid, gen in other.generators.items():
            if gid in gens and gens[gid] is not gen and gens[gid] != gen:
                raise ValueError(f"conflicting generators for id {gid!r}")
            gens[gid] = gen
        return gens

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PCSOSymbol.constant(other)
        return PCSOSymbol(self.terms + other.terms, self._merge_gens(other))

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            terms = tuple((step * other, ids) for step, ids in self.terms)
            return PCSOSymbol(terms, dict(self.generators))
        terms = []
        for s1, ids1 in self.terms:
            for s2, ids2 in other.terms:
                terms.append((s1 * s2, ids1 + ids2))
        return PCSOSymbol(tuple(terms), self._merge_gens(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def reflect(self) -> "PCSOSymbol":
        """The symbol x -> b(-x)."""
        terms = []
        gens: dict[str, SOGenerator] = {}
        for step, ids in self.terms:
            rids = []
            for gid in ids:
                rg = self.generators[gid].reflect()
                gens[rg.id] = rg
                rids.append(rg.id)
            terms.append((step.reflect(), tuple(rids)))
        return PCSOSymbol(tuple(terms), gens)

    def shift(self, eta: float) -> "PCSOSymbol":
        """The symbol x -> b(eta + x)."""
        terms = []
        gens: dict[str, SOGenerator] = {}
        for step, ids in self.terms:
            sids = []
            for gid in ids:
                sg = self.generators[gid].shift(eta)
                gens[sg.id] = sg
                sids.append(sg.id)
            terms.append((step.shift(eta), tuple(sids)))
        return PCSOSymbol(tuple(terms), gens)


# ---------------------------------------------------------------------------
# fibers over infinity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberAssignment:
    """Values eta(g) for each generator id; a point of the fiber over oo.

    ``attainable`` records the bracketing pedigree: True when the tuple is
    known to be jointly realized by some sequence tau_n -> oo (single
    generator, or trajectory sampling); False for tuples produced by the
    product strategy over several generators, which over-approximates the
    joint partial-limit set.
    """

    values: tuple[tuple[str, complex], ...]
    attainable: bool = True

    @staticmethod
    def of(mapping: dict[str, complex], attainable: bool = True) -> "FiberAssignment":
        return FiberAssignment(tuple(sorted((k, complex(v)) for k, v in mapping.items())),
                               attainable)

    def __getitem__(self, gid: str) -> complex:
        for k, v in self.values:
            if k == gid:
                return v
        raise MissingAssignment(f"fiber does not assign generator {gid!r}")

    def __str__(self) -> str:
        if not self.values:
            return "{}"
        return "{" + ", ".join(f"{k}: {v:.6g}" for k, v in self.values) + "}"

    def as_dict(self) -> dict[str, complex]:
        return dict(self.values)

    def validate(self, generators: dict[str, SOGenerator], tol: float = 1e-7) -> None:
        for gid, v in self.values:
            gen = generators.get(gid)
            if gen is None:
                raise MissingAssignment(f"unknown generator id {gid!r}")
            if not gen.cluster.contains(v, tol):
                raise ValueOutsideCluster(
                    f"value {v} for generator {gid!r} is off its cluster set"
                )


def sample_fibers(symbols: list[PCSOSymbol], strategy: str = "product",
                  resolution: int = 16, tau0: float = 2.0,
                  rho: float = 1.5) -> list[FiberAssignment]:
    """Finite family of fiber points for the generators the symbols use.

    product:
        cartesian grid over each generator's cluster set, independently.
        Over-approximates the joint fiber set; tuples are marked attainable
        only when at most one generator is in play.
    trajectory:
        evaluate all generators along the shared geometric grid
        tau_n = tau0 * rho^n and project each value onto its cluster set.
        Under-approximates: only jointly attained tuples appear.

    With no generators at all the single empty fiber is returned.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if strategy not in ("product", "trajectory"):
        raise ValueError(f"unknown fiber strategy {strategy!r}")
    gens: dict[str, SOGenerator] = {}
    for sym in symbols:
        for gid in sym.generator_ids:
            gens[gid] = sym.generators[gid]
    if not gens:
        return [FiberAssignment.of({})]

    if strategy == "product":
        grids = {gid: gen.cluster_values(resolution) for gid, gen in gens.items()}
        fibers = [FiberAssignment.of({}, attainable=len(gens) <= 1)]
        for gid, vals in grids.items():
            fibers = [
                FiberAssignment.of({**f.as_dict(), gid: v}, attainable=f.attainable)
                for f in fibers
                for v in vals
            ]
        return fibers
    if strategy == "trajectory":
        taus = tau0 * rho ** np.arange(resolution)
        out = []
        for t in taus:
            vals = {
                gid: gen.cluster.project(complex(gen.evaluator(float(t))))
                for gid, gen in gens.items()
            }
            out.append(FiberAssignment.of(vals, attainable=True))
        return out
    raise ValueError(f"unknown fiber strategy {strategy!r}")
