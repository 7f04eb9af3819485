"""Monte Carlo unisolvence verification and proof-machinery diagnostics.

Polynomial-free GMQ interpolation matrices on randomly sampled distinct
points are almost surely nonsingular (for kernel order above one).  This
module checks that claim empirically at desk scale and exercises the
complex-analytic machinery behind it:

* :func:`run_trials` -- seeded sample/assemble/factorize trials with an
  honest three-way rank verdict (full / deficient / indeterminate).  Exact
  nonsingularity is undecidable in floating point once the condition number
  passes 1/(100*eps), so such trials are bucketed as indeterminate rather
  than forced into a yes/no answer.
* :func:`det_oracle` -- brute-force cofactor (Laplace) determinant for small
  matrices, kept independent of the LAPACK-based factorization it checks.
* :func:`laplace_quadratic_decompose` -- expanding det(A(x)) along the last
  row of the bordered matrix A(x) = [[V_n, phi(x)], [phi(x)^T, 1]] yields a
  quadratic in the last basis function:
      det(A(x)) = -det(V_{n-1}) * phi_n(x)^2 + a(x) * phi_n(x) + b(x),
  with the cofactor weights defining a and b independent of x.
* :func:`branch_analyticity_check` / :func:`argument_margin` -- verify that
  along a complexified line through the last center, the remaining basis
  functions stay off the branch cut at the principal branch point z*
  (positive real part or nonzero imaginary part of 1 + p_j(u)).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .interp import CONDITION_GUARD, Factorization, InterpMatrix, assemble, factorize
from .kernels import (
    ComplexLine,
    KernelParams,
    branch_point,
    complex_line_norm_sq,
    gmq_eval,
    validate_theorem_mode,
)
from .sampling import PointSet, derive_seed, min_pairwise_distance, sample_points
from .serialize import dump_json, fmt17

# Caps: the cofactor oracle is factorial, the SVD cubic.
ORACLE_MAX_N = 10
DECOMPOSE_MAX_N = 9
TRIAL_MAX_N = 400

# Pairwise distances below this fraction of the domain diameter mark a
# degenerate draw (flagged, never silently accepted).
DEGENERATE_FRACTION = 1e-12

# |Im| must exceed this (relative) margin to count as "nonzero imaginary".
IMAG_MARGIN = 1e-10

RANK_FULL = "full"
RANK_DEFICIENT = "deficient"
RANK_INDETERMINATE = "indeterminate"

TRIAL_CSV_COLUMNS = (
    "trial,seed,d,n,epsilon,k,beta,min_dist,rank_status,"
    "det_sign,logabsdet,sigma_min,sigma_max,cond,millis"
)


class CaseViolationError(ArithmeticError):
    """A geometric margin claimed by the analyticity argument failed."""


@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo experiment: T trials of n points each."""

    domain: object
    density: object
    params: KernelParams
    n: int
    trials: int
    master_seed: int
    rank_tolerance: Optional[float] = None
    theorem_mode: bool = False

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be at least 1")
        if self.n > TRIAL_MAX_N:
            raise ValueError(f"n={self.n} exceeds the Monte Carlo cap {TRIAL_MAX_N}")
        if self.theorem_mode:
            validate_theorem_mode(self.params)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of a single trial (all outcomes are data, none raise)."""

    trial: int
    seed: int
    d: int
    n: int
    min_dist: float
    rank_status: str
    det_sign: int
    logabsdet: float
    sigma_min: float
    sigma_max: float
    condition: float
    millis: float
    degenerate: bool = False


def classify_rank(fact: Factorization) -> str:
    """Three-way rank verdict; indeterminate iff condition > 1/(100*eps)."""
    if fact.condition > CONDITION_GUARD:
        return RANK_INDETERMINATE
    return RANK_FULL if fact.full_rank else RANK_DEFICIENT


def run_single_trial(config: TrialConfig, index: int) -> TrialRecord:
    """Sample, assemble and factorize one seeded trial."""
    start = time.perf_counter()
    seed = derive_seed(config.master_seed, index)
    ps = sample_points(config.domain, config.density, config.n, seed)
    if config.n >= 2:
        min_dist = min_pairwise_distance(ps)
    else:
        min_dist = math.inf
    degenerate = min_dist < DEGENERATE_FRACTION * config.domain.diameter()
    if min_dist == 0.0:
        # cannot assemble; exact coincidence makes the verdict undecidable
        millis = 1e3 * (time.perf_counter() - start)
        return TrialRecord(
            trial=index,
            seed=seed,
            d=ps.dim,
            n=config.n,
            min_dist=min_dist,
            rank_status=RANK_INDETERMINATE,
            det_sign=0,
            logabsdet=math.nan,
            sigma_min=math.nan,
            sigma_max=math.nan,
            condition=math.inf,
            millis=millis,
            degenerate=True,
        )
    fact = factorize(assemble(config.params, ps), config.rank_tolerance)
    millis = 1e3 * (time.perf_counter() - start)
    return TrialRecord(
        trial=index,
        seed=seed,
        d=ps.dim,
        n=config.n,
        min_dist=min_dist,
        rank_status=classify_rank(fact),
        det_sign=fact.sign,
        logabsdet=fact.logabsdet,
        sigma_min=fact.sigma_min,
        sigma_max=fact.sigma_max,
        condition=fact.condition,
        millis=millis,
        degenerate=degenerate,
    )


def summarize(records, config: TrialConfig) -> dict:
    """Count rank statuses and echo the configuration."""
    counts = {RANK_FULL: 0, RANK_DEFICIENT: 0, RANK_INDETERMINATE: 0}
    degenerate = 0
    for rec in records:
        counts[rec.rank_status] += 1
        degenerate += rec.degenerate
    return {
        "trials": len(records),
        "full": counts[RANK_FULL],
        "deficient": counts[RANK_DEFICIENT],
        "indeterminate": counts[RANK_INDETERMINATE],
        "degenerate": degenerate,
        "config_echo": {
            "domain": type(config.domain).__name__,
            "density": type(config.density).__name__,
            "dim": config.domain.dim,
            "epsilon": config.params.epsilon,
            "k": config.params.k,
            "beta": config.params.beta,
            "n": config.n,
            "trials": config.trials,
            "master_seed": config.master_seed,
            "rank_tolerance": config.rank_tolerance,
            "theorem_mode": config.theorem_mode,
        },
    }


def run_trials(config: TrialConfig, threads: int = 1):
    """Run all trials; returns (records, summary).

    Trials are independent, each deriving its stream from
    (master_seed, trial index), so results are identical for any thread
    count; records are merged in trial-index order.
    """
    indices = range(config.trials)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda t: run_single_trial(config, t), indices))
    else:
        records = [run_single_trial(config, t) for t in indices]
    records.sort(key=lambda rec: rec.trial)
    return records, summarize(records, config)


def write_trials_csv(records, config: TrialConfig, path) -> None:
    """Trial records as CSV (pinned column order, 17-digit floats)."""
    p = config.params
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRIAL_CSV_COLUMNS + "\n")
        for r in records:
            fh.write(
                ",".join(
                    [
                        str(r.trial),
                        str(r.seed),
                        str(r.d),
                        str(r.n),
                        fmt17(p.epsilon),
                        str(p.k),
                        fmt17(p.beta),
                        fmt17(r.min_dist),
                        r.rank_status,
                        str(r.det_sign),
                        fmt17(r.logabsdet),
                        fmt17(r.sigma_min),
                        fmt17(r.sigma_max),
                        fmt17(r.condition),
                        fmt17(r.millis),
                    ]
                )
                + "\n"
            )


def write_summary_json(summary: dict, path) -> None:
    dump_json(summary, path)


# ---------------------------------------------------------------------------
# Brute-force determinant oracle
# ---------------------------------------------------------------------------


def laplace_det(matrix: np.ndarray) -> float:
    """Determinant by cofactor (Laplace) expansion along the first row.

    The recursion det(M) = sum_j (-1)^j M[0, j] det(minor_j) is applied
    verbatim; sub-determinants are memoized on their column subset, which
    leaves the recursion structure intact while making n <= 10 tractable.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > ORACLE_MAX_N:
        raise ValueError(f"cofactor oracle refuses n={n} > {ORACLE_MAX_N} (factorial cost)")
    rows = a.tolist()
    memo: dict = {}

    def expand(cols: tuple) -> float:
        if len(cols) == 1:
            return rows[n - 1][cols[0]]
        hit = memo.get(cols)
        if hit is not None:
            return hit
        row = rows[n - len(cols)]
        total = 0.0
        sign = 1.0
        for idx, col in enumerate(cols):
            pivot = row[col]
            if pivot != 0.0:
                total += sign * pivot * expand(cols[:idx] + cols[idx + 1 :])
            sign = -sign
        memo[cols] = total
        return total

    return expand(tuple(range(n)))


def det_oracle(m) -> float:
    """Cofactor-expansion determinant of an interpolation matrix (n <= 10)."""
    values = m.values if isinstance(m, InterpMatrix) else m
    return laplace_det(values)


# ---------------------------------------------------------------------------
# Quadratic decomposition of the bordered determinant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticDecomposition:
    """det(A(x)) split as c2 * phi_n(x)^2 + ax * phi_n(x) + bx."""

    c2: float
    ax: float
    bx: float
    fx: float


def _cofactor_matrix(v: np.ndarray) -> np.ndarray:
    n = v.shape[0]
    cof = np.empty((n, n))
    idx = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = v[np.ix_(idx != i, idx != j)]
            det = laplace_det(minor) if minor.size else 1.0
            cof[i, j] = (-1.0) ** (i + j) * det
    return cof


def laplace_quadratic_weights(params: KernelParams, nodes: PointSet):
    """x-independent weights of the bordered-determinant quadratic.

    Returns (c2, a_weights, b_weights, b_const) such that for any point x
    with basis values phi_i(x):

        det(A(x)) = c2 * phi_n^2 + (sum_i a_weights[i] phi_i) * phi_n
                    + sum_ij b_weights[i, j] phi_i phi_j + b_const

    with i, j ranging over the first n-1 centers.  c2 equals -det(V_{n-1});
    that the weights do not depend on x is the computable content of a and b
    lying in the span of the first n-1 basis functions (and their products).
    """
    n = nodes.n
    if not 2 <= n <= DECOMPOSE_MAX_N:
        raise ValueError(f"decomposition supports 2 <= n <= {DECOMPOSE_MAX_N}, got {n}")
    v = assemble(params, nodes).values
    cof = _cofactor_matrix(v)
    c2 = -cof[n - 1, n - 1]
    a_weights = -2.0 * cof[: n - 1, n - 1]
    b_weights = -cof[: n - 1, : n - 1]
    b_const = laplace_det(v)
    return float(c2), a_weights, b_weights, float(b_const)


def bordered_matrix(params: KernelParams, nodes: PointSet, x) -> np.ndarray:
    """The (n+1) x (n+1) matrix A(x): V_n bordered by phi_i(x) and 1."""
    xa = np.asarray(x, dtype=float)
    if xa.shape != (nodes.dim,):
        raise ValueError(f"x must be a point in dimension {nodes.dim}")
    v = assemble(params, nodes).values
    phi = gmq_eval(params, np.linalg.norm(nodes.points - xa, axis=1))
    n = nodes.n
    a = np.empty((n + 1, n + 1))
    a[:n, :n] = v
    a[:n, n] = phi
    a[n, :n] = phi
    a[n, n] = 1.0
    return a


def laplace_quadratic_decompose(
    params: KernelParams, nodes: PointSet, x
) -> QuadraticDecomposition:
    """Evaluate the bordered-determinant quadratic at one point.

    fx is det(A(x)) computed independently by the cofactor oracle; the
    returned pieces satisfy fx = c2*phi_n(x)^2 + ax*phi_n(x) + bx up to
    roundoff.  ``x`` must be distinct from every node.
    """
    xa = np.asarray(x, dtype=float)
    dists = np.linalg.norm(nodes.points - xa, axis=1)
    if np.any(dists == 0.0):
        raise ValueError("x coincides with an interpolation node")
    c2, a_weights, b_weights, b_const = laplace_quadratic_weights(params, nodes)
    phi = gmq_eval(params, dists)
    head = phi[:-1]
    ax = float(a_weights @ head)
    bx = float(head @ b_weights @ head + b_const)
    fx = laplace_det(bordered_matrix(params, nodes, xa))
    return QuadraticDecomposition(c2=c2, ax=ax, bx=bx, fx=float(fx))


# ---------------------------------------------------------------------------
# Directions and branch analyticity
# ---------------------------------------------------------------------------


def pick_direction(nodes: PointSet, j: int, seed: int):
    """Unit vector for the complexified line through the last center.

    For d >= 2, draws a (seeded) uniform direction in the orthogonal
    complement of x_last - x_j.  For d = 1 the only direction is u = 1;
    the second return value signals whether the node order must first be
    changed so the last node is the maximum (the d = 1 analyticity argument
    needs positive offsets).
    """
    pts = nodes.points
    last = pts[-1]
    if not 0 <= j < nodes.n - 1:
        raise ValueError(f"j must index a non-final node, got {j}")
    diff = last - pts[j]
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise ValueError("the last node coincides with node j")
    if nodes.dim == 1:
        reorder_needed = bool(np.max(pts) > last[0])
        return np.array([1.0]), reorder_needed
    unit = diff / norm
    rng = np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))
    while True:
        g = rng.standard_normal(nodes.dim)
        v = g - (g @ unit) * unit
        vnorm = float(np.linalg.norm(v))
        if vnorm > 1e-8:
            return v / vnorm, False


def one_plus_p(params: KernelParams, last, other, u) -> complex:
    """1 + eps^(2k) * (z*^2 + 2 z* <u, last-other> + |last-other|^2)^k.

    This is the complex number whose position relative to the branch cut
    decides whether the basis function centered at ``other`` is analytic at
    the branch point of the one centered at ``last``.
    """
    line = ComplexLine(np.asarray(last, dtype=float), np.asarray(u, dtype=float))
    q = complex_line_norm_sq(line, branch_point(params), other)
    return 1.0 + params.epsilon ** (2 * params.k) * q**params.k


CLASS_POSITIVE_REAL = "positive-real-part"
CLASS_NONZERO_IMAG = "nonzero-imaginary"
CLASS_VIOLATION = "violation"


@dataclass(frozen=True)
class BranchEntry:
    index: int
    value: complex
    classification: str

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class BranchReport:
    """Per-center branch positions 1 + p_j(u) for j < n.

    ``closed_form_defect`` is populated for k = 1, where
    1 + p_j(u) = eps^2 |x_n - x_j|^2 + 2 i eps <u, x_n - x_j> exactly.
    """

    entries: tuple
    closed_form_defect: Optional[float] = None

    @property
    def violations(self) -> tuple:
        return tuple(e for e in self.entries if e.classification == CLASS_VIOLATION)

    @property
    def worst_margin(self) -> float:
        """Smallest max(Re, |Im|) over entries; distance-from-cut proxy."""
        return min(max(e.re, abs(e.im)) for e in self.entries)


def _classify(value: complex) -> str:
    if value.real > 0.0:
        return CLASS_POSITIVE_REAL
    if abs(value.imag) > IMAG_MARGIN * (1.0 + abs(value)):
        return CLASS_NONZERO_IMAG
    return CLASS_VIOLATION


def branch_analyticity_check(
    params: KernelParams, nodes: PointSet, u
) -> BranchReport:
    """Classify 1 + p_j(u) for every non-final center j.

    A violation (nonpositive real part AND imaginary part within the
    roundoff margin) would put the center's basis function on the branch
    cut; violations are reported, never raised.
    """
    ua = np.asarray(u, dtype=float)
    pts = nodes.points
    last = pts[-1]
    entries = []
    defect = 0.0
    for j in range(nodes.n - 1):
        val = one_plus_p(params, last, pts[j], ua)
        entries.append(BranchEntry(index=j, value=val, classification=_classify(val)))
        if params.k == 1:
            delta = last - pts[j]
            closed = complex(
                params.epsilon**2 * float(delta @ delta),
                2.0 * params.epsilon * float(ua @ delta),
            )
            defect = max(defect, abs(val - closed))
    return BranchReport(
        entries=tuple(entries),
        closed_form_defect=defect if params.k == 1 else None,
    )


CASE_ORTHOGONAL = "orthogonal"
CASE_ONE_DIM = "one-dim"


def argument_margin(params: KernelParams, R: float, case: str = CASE_ORTHOGONAL) -> float:
    """Principal argument of the inner complex number of the k > 1 cases.

    For the orthogonal-direction case the inner number is
    e^(i pi/k) + (eps R)^2; for the one-dimensional case (offset Delta = R
    along u = 1) it is e^(i pi/k) + 2 eps R e^(i pi/(2k)) + (eps R)^2.
    The argument must lie strictly in (0, pi/k); anything else contradicts
    the geometric margin claim and raises :class:`CaseViolationError`.
    """
    if R <= 0.0:
        raise ValueError("R must be positive")
    if params.k < 2:
        raise ValueError("argument margins apply to k >= 2")
    a = params.epsilon * R
    if case == CASE_ORTHOGONAL:
        inner = complex(math.cos(math.pi / params.k), math.sin(math.pi / params.k)) + a * a
    elif case == CASE_ONE_DIM:
        inner = (
            complex(math.cos(math.pi / params.k), math.sin(math.pi / params.k))
            + 2.0
            * a
            * complex(math.cos(math.pi / (2 * params.k)), math.sin(math.pi / (2 * params.k)))
            + a * a
        )
    else:
        raise ValueError(f"unknown case {case!r}")
    angle = math.atan2(inner.imag, inner.real)
    if not 0.0 < angle < math.pi / params.k:
        raise CaseViolationError(
            f"argument {angle!r} of {inner!r} is outside (0, pi/{params.k})"
        )
    return angle


def with_last_maximal(nodes: PointSet) -> PointSet:
    """Reorder a 1-d point set so its maximum is the final node."""
    if nodes.dim != 1:
        raise ValueError("reordering applies to 1-d point sets")
    idx = int(np.argmax(nodes.points[:, 0]))
    order = list(range(nodes.n))
    order[idx], order[-1] = order[-1], order[idx]
    return replace(nodes, points=nodes.points[order])
