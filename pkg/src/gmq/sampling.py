"""Reproducible i.i.d. random point sequences on open connected domains.

Domains are open by construction (boundary hits are resampled) and points
are generated from a counter-based Philox stream keyed by a 64-bit seed, so
the same (domain, density, n, seed) always reproduces the same point set,
independently of execution order or thread count.  Per-trial seeds for
Monte Carlo work are derived from a (master_seed, trial_index) pair via
:func:`derive_seed`.

Three density kinds are supported: uniform, product of piecewise-constant
1-d marginals (boxes only), and rejection sampling from a user-supplied
nonnegative weight function.  Arbitrary integrable densities are admissible
in principle; these three cover the verification workloads here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import pdist

from .serialize import fmt17

_MASK64 = (1 << 64) - 1

# Draws are made in batches of at least this size while filtering for strict
# interior membership / rejection acceptance.
_BATCH = 128


class RejectionBudgetError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Mix (master_seed, index) into one 64-bit stream key.

    SplitMix64 is a bijection, so for a fixed master seed distinct indices
    produce distinct keys; trials can therefore run in any order (or in
    parallel) with bitwise-reproducible streams.
    """
    return _splitmix64((_splitmix64(master_seed & _MASK64) + (index & _MASK64)) & _MASK64)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box prod_l (lower_l, upper_l)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or len(lo) < 1:
            raise ValueError("lower/upper must have equal positive length")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("all box widths must be positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounding_box(self):
        return np.array(self.lower), np.array(self.upper)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior membership, one bool per row."""
        lo, hi = self.bounding_box()
        return np.all((points > lo) & (points < hi), axis=1)

    def contains_closed(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.bounding_box()
        return np.all((points >= lo) & (points <= hi), axis=1)

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))


def unit_box(dim: int) -> Box:
    return Box((0.0,) * dim, (1.0,) * dim)


@dataclass(frozen=True)
class Ball:
    """Open Euclidean ball."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        r = float(self.radius)
        if len(c) < 1:
            raise ValueError("center must be nonempty")
        if r <= 0.0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return len(self.center)

    def bounding_box(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - np.array(self.center), axis=1) < self.radius

    def diameter(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class BoxShell:
    """Open outer box minus a closed inner box (connected annular region).

    Requires dim >= 2 and the inner box strictly inside the outer one, which
    makes the difference open and connected by construction.
    """

    outer: Box
    inner: Box

    def __post_init__(self):
        if self.outer.dim != self.inner.dim:
            raise ValueError("outer and inner boxes must share a dimension")
        if self.outer.dim < 2:
            raise ValueError("box-minus-box needs dim >= 2 to stay connected")
        ilo, ihi = self.inner.bounding_box()
        olo, ohi = self.outer.bounding_box()
        if not (np.all(ilo > olo) and np.all(ihi < ohi)):
            raise ValueError("inner box must be strictly inside the outer box")

    @property
    def dim(self) -> int:
        return self.outer.dim

    def bounding_box(self):
        return self.outer.bounding_box()

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.outer.contains(points) & ~self.inner.contains_closed(points)

    def diameter(self) -> float:
        return self.outer.diameter()


@dataclass(frozen=True)
class Uniform:
    """Uniform density on the domain."""


@dataclass(frozen=True)
class ProductMarginals:
    """Product of piecewise-constant 1-d marginal densities (boxes only).

    ``edges[l]`` are ascending bin edges along axis l, ``weights[l]`` the
    nonnegative bin masses; each axis is normalized to integrate to one.
    """

    edges: tuple
    weights: tuple

    def __post_init__(self):
        edges = tuple(tuple(float(v) for v in e) for e in self.edges)
        weights = tuple(tuple(float(v) for v in w) for w in self.weights)
        if len(edges) != len(weights) or not edges:
            raise ValueError("need one (edges, weights) pair per axis")
        for e, w in zip(edges, weights):
            if len(e) != len(w) + 1 or len(w) < 1:
                raise ValueError("edges must be one longer than weights")
            if any(b <= a for a, b in zip(e, e[1:])):
                raise ValueError("edges must be strictly ascending")
            if any(x < 0 for x in w) or sum(w) <= 0:
                raise ValueError("weights must be nonnegative with positive sum")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class WeightedRejection:
    """Density proportional to a user weight function, via rejection.

    ``weight`` maps an (m, d) array to m nonnegative values bounded by
    ``bound`` on the domain.  Sampling draws uniformly from the bounding box
    and accepts with probability weight/bound; exceeding the attempt budget
    raises :class:`RejectionBudgetError`.
    """

    weight: Callable[[np.ndarray], np.ndarray]
    bound: float
    max_attempts_per_point: int = 10_000

    def __post_init__(self):
        if float(self.bound) <= 0.0:
            raise ValueError("bound must be positive")


@dataclass(frozen=True)
class PointSet:
    """An ordered set of n points in R^d with generation provenance.

    ``domain`` and ``density`` are None for point sets loaded from CSV or
    assembled directly from arrays.
    """

    points: np.ndarray
    seed: int
    domain: Optional[object] = None
    density: Optional[object] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must form a nonempty (n, d) array")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, count: int) -> "PointSet":
        """The first ``count`` points, provenance preserved."""
        if not 1 <= count <= self.n:
            raise ValueError(f"count must be in [1, {self.n}], got {count}")
        return PointSet(self.points[:count], self.seed, self.domain, self.density)


def _fill(n, dim, rng, propose, accept):
    """Draw batches from ``propose`` keeping rows passing ``accept``."""
    chunks = []
    have = 0
    while have < n:
        m = max(_BATCH, 2 * (n - have))
        cand = propose(rng, m)
        keep = cand[accept(cand)]
        if keep.shape[0]:
            chunks.append(keep)
            have += keep.shape[0]
    return np.concatenate(chunks, axis=0)[:n]


def _sample_uniform(domain, n, rng):
    lo, hi = domain.bounding_box()
    if isinstance(domain, Ball):
        c = np.array(domain.center)

        def propose(rng, m):
            g = rng.standard_normal((m, domain.dim))
            norms = np.linalg.norm(g, axis=1, keepdims=True)
            norms[norms == 0.0] = 1.0
            radii = domain.radius * rng.random((m, 1)) ** (1.0 / domain.dim)
            return c + radii * g / norms

    else:

        def propose(rng, m):
            return rng.uniform(lo, hi, size=(m, domain.dim))

    return _fill(n, domain.dim, rng, propose, domain.contains)


def _sample_marginals(domain, density, n, rng):
    if not isinstance(domain, Box):
        raise ValueError("product-of-marginals densities require a box domain")
    if density.dim != domain.dim:
        raise ValueError("marginal dimension does not match the domain")
    lo, hi = domain.bounding_box()
    for axis in range(domain.dim):
        e = density.edges[axis]
        if e[0] < lo[axis] or e[-1] > hi[axis]:
            raise ValueError(f"marginal support on axis {axis} leaves the box")

    def propose(rng, m):
        cols = []
        for axis in range(domain.dim):
            e = np.array(density.edges[axis])
            w = np.array(density.weights[axis], dtype=float)
            masses = w * np.diff(e)
            cdf = np.cumsum(masses) / masses.sum()
            bins = np.searchsorted(cdf, rng.random(m), side="right")
            bins = np.minimum(bins, len(w) - 1)
            frac = rng.random(m)
            cols.append(e[bins] + frac * (e[bins + 1] - e[bins]))
        return np.stack(cols, axis=1)

    return _fill(n, domain.dim, rng, propose, domain.contains)


def _sample_rejection(domain, density, n, rng):
    lo, hi = domain.bounding_box()
    chunks = []
    have = 0
    attempts = 0
    budget = density.max_attempts_per_point * n
    while have < n:
        m = max(_BATCH, 2 * (n - have))
        if attempts + m > budget:
            m = budget - attempts
            if m <= 0:
                raise RejectionBudgetError(
                    f"rejection sampling used {attempts} attempts for "
                    f"{have}/{n} points (budget {budget})"
                )
        cand = rng.uniform(lo, hi, size=(m, domain.dim))
        thresh = rng.random(m) * density.bound
        attempts += m
        values = np.asarray(density.weight(cand), dtype=float)
        if values.shape != (m,):
            raise ValueError("weight function must return one value per row")
        if np.any(values < 0.0):
            raise ValueError("weight function must be nonnegative")
        keep = cand[domain.contains(cand) & (thresh < values)]
        if keep.shape[0]:
            chunks.append(keep)
            have += keep.shape[0]
    return np.concatenate(chunks, axis=0)[:n]


def sample_points(domain, density, n: int, seed: int) -> PointSet:
    """Draw n i.i.d. points on the open domain with the given density.

    Deterministic given the seed: the same (domain, density, n, seed)
    reproduces the identical point set bit for bit.  Points landing exactly
    on the boundary (possible in floating point, probability ~0) are
    resampled so membership is strict.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = _generator(seed)
    if isinstance(density, Uniform):
        pts = _sample_uniform(domain, n, rng)
    elif isinstance(density, ProductMarginals):
        pts = _sample_marginals(domain, density, n, rng)
    elif isinstance(density, WeightedRejection):
        pts = _sample_rejection(domain, density, n, rng)
    else:
        raise TypeError(f"unsupported density {type(density).__name__}")
    return PointSet(pts, seed, domain, density)


def min_pairwise_distance(ps: PointSet) -> float:
    """Minimum Euclidean distance over all point pairs (requires n >= 2)."""
    if ps.n < 2:
        raise ValueError("min_pairwise_distance needs at least two points")
    return float(pdist(ps.points).min())


def save_points_csv(ps: PointSet, path) -> None:
    """Write a point set as CSV with a `# dim=?,n=?,seed=?` header comment.

    Coordinates carry 17 significant digits for exact decimal round trips.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dim={ps.dim},n={ps.n},seed={ps.seed}\n")
        for row in ps.points:
            fh.write(",".join(fmt17(v) for v in row))
            fh.write("\n")


_HEADER_RE = re.compile(r"^#\s*dim=(\d+),n=(\d+),seed=(-?\d+)\s*$")


def load_points_csv(path) -> PointSet:
    """Read a point set written by :func:`save_points_csv`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        m = _HEADER_RE.match(header)
        if not m:
            raise ValueError(f"malformed point CSV header: {header!r}")
        dim, n, seed = int(m.group(1)), int(m.group(2)), int(m.group(3))
        rows = [
            [float(tok) for tok in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    pts = np.array(rows, dtype=float)
    if pts.shape != (n, dim):
        raise ValueError(
            f"point CSV body shape {pts.shape} does not match header ({n}, {dim})"
        )
    return PointSet(pts, seed)
