"""Interpolation matrices, factorizations and GMQ interpolants.

The central object is the symmetric matrix V[i, j] = phi(|x_i - x_j|) with
unit diagonal.  Interpolation is polynomial-free by default (solve V c = f
directly); the classical baseline with a total-degree (m-1) polynomial tail
and moment side conditions is provided for comparison, where m is the
conditional positive definiteness order of the kernel.

Rank decisions use the singular value spectrum (numerical rank at a relative
tolerance, default n*eps); determinant sign and log magnitude come from a
pivoted LU.  Fitting refuses systems whose condition number exceeds
1/(100*eps): past that point nodal residuals and downstream checks would be
numerically meaningless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.spatial.distance import cdist, pdist, squareform

from .kernels import KernelParams, gmq_eval, gmq_order
from .sampling import PointSet
from .serialize import dump_json

# Refuse to fit past this condition number (see module docstring).
CONDITION_GUARD = 1.0 / (100.0 * np.finfo(float).eps)


class CoincidentPointsError(ValueError):
    """Assembly refused: the point set contains coincident points."""


class NumericallySingularError(RuntimeError):
    """Fit refused: the system is numerically singular or beyond the guard.

    The offending :class:`Factorization` is carried in ``factorization``.
    """

    def __init__(self, factorization: "Factorization", what: str = "interpolation"):
        super().__init__(
            f"{what} system is numerically singular: rank {factorization.rank} "
            f"of {factorization.size}, condition {factorization.condition:.3e}"
        )
        self.factorization = factorization


class PolynomialDegeneracyError(ValueError):
    """The points do not determine the polynomial tail (rank-deficient block)."""


@dataclass(frozen=True)
class InterpMatrix:
    """Dense symmetric kernel matrix for one (params, point set) pair."""

    values: np.ndarray
    params: KernelParams
    points: PointSet

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Factorization:
    """Rank-revealing summary of an interpolation matrix.

    sign is in {-1, 0, +1} with sign = 0 exactly when the numerical rank is
    below the matrix order; logabsdet is the natural log of |det|.
    """

    sign: int
    logabsdet: float
    sigma_min: float
    sigma_max: float
    rank: int
    size: int
    rank_tolerance: float

    @property
    def condition(self) -> float:
        if self.sigma_min == 0.0:
            return math.inf
        return self.sigma_max / self.sigma_min

    @property
    def full_rank(self) -> bool:
        return self.rank == self.size


@dataclass(frozen=True)
class PolynomialTail:
    """Total-degree polynomial in a shifted/scaled monomial basis.

    Basis functions are prod_l ((x_l - shift_l) / scale)^(alpha_l) over the
    multi-indices ``exponents`` (graded lexicographic order).
    """

    degree: int
    exponents: np.ndarray
    coefficients: np.ndarray
    shift: np.ndarray
    scale: float

    def __post_init__(self):
        for name in ("exponents", "coefficients", "shift"):
            a = np.array(getattr(self, name))
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def eval(self, points: np.ndarray) -> np.ndarray:
        scaled = (points - self.shift) / self.scale
        basis = np.prod(
            scaled[:, None, :] ** self.exponents[None, :, :], axis=2
        )
        return basis @ self.coefficients


@dataclass(frozen=True)
class Interpolant:
    """Kernel centers and coefficients, plus an optional polynomial tail."""

    params: KernelParams
    centers: np.ndarray
    coefficients: np.ndarray
    tail: Optional[PolynomialTail] = None

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        co = np.array(self.coefficients, dtype=float)
        if c.ndim != 2 or co.shape != (c.shape[0],):
            raise ValueError("centers must be (n, d) and coefficients length n")
        c.flags.writeable = False
        co.flags.writeable = False
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "coefficients", co)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class ErrorStats:
    max_error: float
    rms_error: float


def assemble(params: KernelParams, ps: PointSet) -> InterpMatrix:
    """Build the symmetric kernel matrix with exact unit diagonal.

    Each off-diagonal entry is computed once from the pairwise distance, so
    entry(i, j) == entry(j, i) exactly.  Coincident points are refused.
    """
    n = ps.n
    if n == 1:
        return InterpMatrix(np.ones((1, 1)), params, ps)
    dists = pdist(ps.points)
    if dists.min() == 0.0:
        dmat = squareform(dists)
        np.fill_diagonal(dmat, np.inf)
        i, j = np.unravel_index(np.argmin(dmat), dmat.shape)
        raise CoincidentPointsError(
            f"points {i} and {j} coincide; interpolation matrix would be singular"
        )
    values = gmq_eval(params, squareform(dists))
    np.fill_diagonal(values, 1.0)
    return InterpMatrix(values, params, ps)


def factorize(m: InterpMatrix, rank_tolerance: Optional[float] = None) -> Factorization:
    """Determinant sign/log-magnitude, extreme singular values and rank.

    ``rank_tolerance`` is relative to the largest singular value and defaults
    to n*eps.  Rank deficiency is a reported outcome, not an error.
    """
    v = m.values
    n = m.n
    tol = float(n * np.finfo(float).eps if rank_tolerance is None else rank_tolerance)
    sign, logabs = np.linalg.slogdet(v)
    sigma = np.linalg.svd(v, compute_uv=False)
    rank = int(np.count_nonzero(sigma > tol * sigma[0]))
    if sign == 0.0:
        # det is exactly zero; force the rank bucket to agree
        rank = min(rank, n - 1)
    if rank < n:
        sign = 0.0
    return Factorization(
        sign=int(sign),
        logabsdet=float(logabs),
        sigma_min=float(sigma[-1]),
        sigma_max=float(sigma[0]),
        rank=rank,
        size=n,
        rank_tolerance=tol,
    )


def _solve_refined(matrix: np.ndarray, rhs: np.ndarray, steps: int = 3) -> np.ndarray:
    """LU solve with iterative refinement (extended-precision residuals)."""
    lu, piv = sla.lu_factor(matrix)
    x = sla.lu_solve((lu, piv), rhs)
    m_l = matrix.astype(np.longdouble)
    r_l = rhs.astype(np.longdouble)
    for _ in range(steps):
        residual = r_l - m_l @ x.astype(np.longdouble)
        x = x + sla.lu_solve((lu, piv), residual.astype(float))
    return x


def fit(
    params: KernelParams,
    ps: PointSet,
    values,
    rank_tolerance: Optional[float] = None,
) -> Interpolant:
    """Polynomial-free interpolant: solve V c = values directly.

    Raises :class:`NumericallySingularError` when the matrix is numerically
    rank deficient or its condition exceeds the guard.
    """
    f = np.asarray(values, dtype=float)
    if f.shape != (ps.n,):
        raise ValueError(f"values must have length {ps.n}, got shape {f.shape}")
    matrix = assemble(params, ps)
    fact = factorize(matrix, rank_tolerance)
    if not fact.full_rank or fact.condition > CONDITION_GUARD:
        raise NumericallySingularError(fact)
    coeffs = _solve_refined(matrix.values, f)
    return Interpolant(params, ps.points, coeffs, tail=None)


def total_degree_exponents(dim: int, degree: int) -> np.ndarray:
    """Multi-indices with |alpha| <= degree in graded lexicographic order."""
    exps = [
        alpha
        for alpha in product(range(degree + 1), repeat=dim)
        if sum(alpha) <= degree
    ]
    exps.sort(key=lambda a: (sum(a), a))
    return np.array(exps, dtype=int).reshape(len(exps), dim)


def _tail_basis_geometry(points: np.ndarray):
    shift = points.mean(axis=0)
    if points.shape[0] >= 2:
        half = float(pdist(points).max()) / 2.0
    else:
        half = 0.0
    return shift, (half if half > 0.0 else 1.0)


def fit_augmented(
    params: KernelParams,
    ps: PointSet,
    values,
    rank_tolerance: Optional[float] = None,
) -> Interpolant:
    """Classical baseline: kernel part plus degree-(m-1) polynomial tail.

    Solves the saddle-point system [[V, P], [P^T, 0]] [c; g] = [values; 0]
    where P is the monomial Vandermonde of total degree <= m-1 and
    m = ceil(beta) is the kernel order, so the kernel coefficients satisfy
    the moment side conditions sum_j c_j p(x_j) = 0 for every such monomial.
    The monomial basis is shifted to the centroid and scaled by the half
    diameter to control Vandermonde conditioning.  For order m = 0 kernels
    (beta < 0) there is no tail and this reduces to :func:`fit`.
    """
    degree = gmq_order(params) - 1
    if degree < 0:
        return fit(params, ps, values, rank_tolerance)
    f = np.asarray(values, dtype=float)
    if f.shape != (ps.n,):
        raise ValueError(f"values must have length {ps.n}, got shape {f.shape}")

    exponents = total_degree_exponents(ps.dim, degree)
    q = exponents.shape[0]
    shift, scale = _tail_basis_geometry(ps.points)
    scaled = (ps.points - shift) / scale
    pblock = np.prod(scaled[:, None, :] ** exponents[None, :, :], axis=2)

    psv = np.linalg.svd(pblock, compute_uv=False)
    prank = int(np.count_nonzero(psv > max(ps.n, q) * np.finfo(float).eps * psv[0]))
    if prank < q:
        raise PolynomialDegeneracyError(
            f"polynomial block of degree {degree} has rank {prank} < {q}; "
            "the points do not determine the tail (degenerate geometry)"
        )

    matrix = assemble(params, ps)
    n = ps.n
    saddle = np.zeros((n + q, n + q))
    saddle[:n, :n] = matrix.values
    saddle[:n, n:] = pblock
    saddle[n:, :n] = pblock.T
    rhs = np.concatenate([f, np.zeros(q)])

    sigma = np.linalg.svd(saddle, compute_uv=False)
    stol = float(
        (n + q) * np.finfo(float).eps if rank_tolerance is None else rank_tolerance
    )
    srank = int(np.count_nonzero(sigma > stol * sigma[0]))
    cond = math.inf if sigma[-1] == 0.0 else float(sigma[0] / sigma[-1])
    if srank < n + q or cond > CONDITION_GUARD:
        sign, logabs = np.linalg.slogdet(saddle)
        fact = Factorization(
            sign=0 if srank < n + q else int(sign),
            logabsdet=float(logabs),
            sigma_min=float(sigma[-1]),
            sigma_max=float(sigma[0]),
            rank=srank,
            size=n + q,
            rank_tolerance=stol,
        )
        raise NumericallySingularError(fact, what="augmented")

    solution = _solve_refined(saddle, rhs)
    tail = PolynomialTail(
        degree=degree,
        exponents=exponents,
        coefficients=solution[n:],
        shift=shift,
        scale=scale,
    )
    return Interpolant(params, ps.points, solution[:n], tail=tail)


def eval_interpolant(s: Interpolant, x):
    """Evaluate the interpolant at one point (d,) or a batch (m, d)."""
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    pts = xa[None, :] if single else xa
    if pts.ndim != 2 or pts.shape[1] != s.dim:
        raise ValueError(f"evaluation points must have dimension {s.dim}")
    out = gmq_eval(s.params, cdist(pts, s.centers)) @ s.coefficients
    if s.tail is not None:
        out = out + s.tail.eval(pts)
    return float(out[0]) if single else out


def error_report(s: Interpolant, f: Callable, grid: PointSet) -> ErrorStats:
    """Max and RMS deviation of the interpolant from ``f`` over a grid."""
    approx = eval_interpolant(s, grid.points)
    exact = np.asarray(f(grid.points), dtype=float)
    err = np.abs(approx - exact)
    return ErrorStats(
        max_error=float(err.max()),
        rms_error=float(np.sqrt(np.mean(err**2))),
    )


def _tail_raw_coefficients(tail: PolynomialTail, dim: int):
    """Expand the shifted/scaled tail into raw monomial coefficients.

    Returns coefficients aligned with total_degree_exponents(dim, degree).
    """
    exps = total_degree_exponents(dim, tail.degree)
    index = {tuple(a): i for i, a in enumerate(map(tuple, exps))}
    out = np.zeros(len(exps))
    for alpha, gamma in zip(map(tuple, tail.exponents), tail.coefficients):
        # ((x - c)/h)^a = h^-a * sum_t C(a, t) x^t (-c)^(a - t), per axis
        per_axis = []
        for l, a in enumerate(alpha):
            terms = [
                (t, math.comb(a, t) * (-tail.shift[l]) ** (a - t) / tail.scale**a)
                for t in range(a + 1)
            ]
            per_axis.append(terms)
        for combo in product(*per_axis):
            target = tuple(t for t, _ in combo)
            weight = gamma
            for _, w in combo:
                weight *= w
            out[index[target]] += weight
    return exps, out


def save_interpolant_json(s: Interpolant, path) -> None:
    """Serialize an interpolant with 17-significant-digit numbers.

    Schema: {kernel: {epsilon, k, beta}, centers: [[...]], coefficients:
    [...], tail: {degree, coefficients} | null}.  Tail coefficients are in
    the raw monomial basis, graded lexicographic order.
    """
    if s.tail is None:
        tail_obj = None
    else:
        _, raw = _tail_raw_coefficients(s.tail, s.dim)
        tail_obj = {"degree": int(s.tail.degree), "coefficients": raw}
    dump_json(
        {
            "kernel": {
                "epsilon": s.params.epsilon,
                "k": s.params.k,
                "beta": s.params.beta,
            },
            "centers": s.centers,
            "coefficients": s.coefficients,
            "tail": tail_obj,
        },
        path,
    )


def load_interpolant_json(path) -> Interpolant:
    """Read an interpolant written by :func:`save_interpolant_json`."""
    import json

    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    params = KernelParams(
        epsilon=obj["kernel"]["epsilon"],
        k=obj["kernel"]["k"],
        beta=obj["kernel"]["beta"],
    )
    centers = np.array(obj["centers"], dtype=float)
    coefficients = np.array(obj["coefficients"], dtype=float)
    tail = None
    if obj.get("tail") is not None:
        degree = int(obj["tail"]["degree"])
        exps = total_degree_exponents(centers.shape[1], degree)
        coeffs = np.array(obj["tail"]["coefficients"], dtype=float)
        if coeffs.shape != (exps.shape[0],):
            raise ValueError(
                f"tail has {coeffs.shape[0]} coefficients, expected {exps.shape[0]}"
            )
        tail = PolynomialTail(
            degree=degree,
            exponents=exps,
            coefficients=coeffs,
            shift=np.zeros(centers.shape[1]),
            scale=1.0,
        )
    return Interpolant(params, centers, coefficients, tail=tail)
