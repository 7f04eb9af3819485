"""Generalized MultiQuadric (GMQ) radial functions.

The family evaluated here is

    phi(r) = (1 + (eps * r)^(2k))^beta,    eps > 0,  k in {1, 2, ...},

with ``eps`` the shape parameter, ``k`` the generalization exponent and
``beta`` a real, nonzero exponent.  Special members:

    ==========================  ==============================================
    parameters                  family
    ==========================  ==============================================
    k = 1, beta = 1/2           Hardy MultiQuadric
    k = 1, beta < 0             inverse MultiQuadric (positive definite)
    k = 1, beta > 0             conditionally positive definite, order
                                ceil(beta)
    k > 1                       generalized family; used here for
                                polynomial-free interpolation with
                                beta > 1, beta not an integer
    ==========================  ==============================================

Besides real evaluation, the module extends phi along a complexified line
``x(z) = base + z * u``: the squared distance to a center becomes a complex
quadratic in ``z`` (NOT a complex 2-norm), and

    phi_center(x(z)) = exp(beta * Log(1 + eps^(2k) * q(z)^k)),

with ``Log`` the principal logarithm.  The nontrivial member of the family,
``phi`` centered at ``base`` itself, has branch points at the roots of
``(eps z)^(2k) + 1``, the principal one being ``z* = eps^-1 e^(i pi/(2k))``.
Evaluation never switches branches: arguments that land on the branch point
(or exactly on the principal cut) raise :class:`BranchViolationError`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Cap on the generalization exponent: keeps (eps*r)^(2k) representable in
# double precision for desk-scale geometry.
MAX_K = 32

# A complex power argument within this relative distance of 0 counts as a
# branch-point hit.
BRANCH_POINT_RTOL = 1e-12


class BranchViolationError(ArithmeticError):
    """Complex evaluation landed on the branch point or the principal cut.

    The offending complex value ``1 + eps^(2k) * q^k`` is carried in
    ``value``; it is never silently fed to the principal power.
    """

    def __init__(self, value: complex):
        super().__init__(
            f"branch violation: 1 + eps^2k * q^k = {value!r} lies on the "
            "branch point or principal cut of the noninteger power"
        )
        self.value = complex(value)


@dataclass(frozen=True)
class KernelParams:
    """The (epsilon, k, beta) triple defining one GMQ kernel.

    epsilon : positive shape parameter (inverse length scale)
    k       : positive integer generalization exponent, at most MAX_K
    beta    : real, nonzero exponent
    """

    epsilon: float
    k: int
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "beta", float(self.beta))
        if not math.isfinite(self.epsilon) or self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.k > MAX_K:
            raise ValueError(f"k={self.k} exceeds the supported cap {MAX_K}")
        object.__setattr__(self, "k", int(self.k))
        if not math.isfinite(self.beta) or self.beta == 0.0:
            raise ValueError(f"beta must be a nonzero real, got {self.beta}")

    @property
    def order(self) -> int:
        return gmq_order(self)


def validate_theorem_mode(params: KernelParams) -> None:
    """Reject parameters outside the almost-sure-unisolvence regime.

    Requires beta > 1 and beta not within 1e-9 of an integer.  The library
    accepts other exponents (Hardy MQ beta=1/2, inverse MQ beta<0) as
    baselines; callers that rely on the polynomial-free guarantee opt into
    this stricter check.
    """
    if params.beta <= 1.0:
        raise ValueError(
            f"theorem mode requires beta > 1, got beta={params.beta}"
        )
    if abs(params.beta - round(params.beta)) <= 1e-9:
        raise ValueError(
            f"theorem mode requires a noninteger beta, got beta={params.beta}"
        )


def gmq_eval(params: KernelParams, r):
    """Evaluate phi(r) = (1 + (eps*r)^(2k))^beta for r >= 0.

    ``r`` may be a scalar or an ndarray.  Computed as
    exp(beta * log1p((eps*r)^(2k))) to avoid cancellation for small eps*r;
    phi(0) is exactly 1.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("radius must be nonnegative")
    out = np.exp(params.beta * np.log1p((params.epsilon * arr) ** (2 * params.k)))
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


def gmq_order(params: KernelParams) -> int:
    """Conditional positive definiteness order: ceil(beta) for beta > 0.

    Negative beta gives the positive definite (inverse MultiQuadric) case,
    reported as order 0.
    """
    if params.beta < 0.0:
        return 0
    return int(math.ceil(params.beta))


def center_eval(params: KernelParams, x, center) -> float:
    """phi applied to the Euclidean distance between ``x`` and ``center``."""
    xa = np.asarray(x, dtype=float)
    ca = np.asarray(center, dtype=float)
    if xa.shape != ca.shape or xa.ndim != 1:
        raise ValueError(
            f"point shapes differ: {xa.shape} vs {ca.shape}"
        )
    return gmq_eval(params, float(np.linalg.norm(xa - ca)))


@dataclass(frozen=True)
class ComplexLine:
    """A real line base + t*u, complexified by letting t be complex.

    ``direction`` must be a unit vector to within 1e-12.
    """

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        direction = np.array(self.direction, dtype=float)
        if base.ndim != 1 or base.shape != direction.shape:
            raise ValueError("base and direction must be 1-D with equal shapes")
        norm = float(np.linalg.norm(direction))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, |u| = {norm!r}")
        base.flags.writeable = False
        direction.flags.writeable = False
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @property
    def dim(self) -> int:
        return self.base.shape[0]


def complex_line_norm_sq(line: ComplexLine, z: complex, center) -> complex:
    """Complex extension of the squared distance along the line.

    Returns z^2 + 2 z <u, base - center> + |base - center|^2, the analytic
    continuation of t -> |base + t u - center|^2.  This is not the square of
    a complex 2-norm.
    """
    ca = np.asarray(center, dtype=float)
    if ca.shape != line.base.shape:
        raise ValueError(f"center shape {ca.shape} does not match line dim {line.dim}")
    delta = line.base - ca
    z = complex(z)
    return z * z + 2.0 * z * float(line.direction @ delta) + float(delta @ delta)


def branch_point(params: KernelParams) -> complex:
    """Principal branch point z* = eps^-1 * e^(i pi / (2k)).

    Satisfies (eps * z*)^(2k) + 1 = 0.
    """
    return cmath.exp(1j * math.pi / (2 * params.k)) / params.epsilon


def gmq_complex_line_eval(
    params: KernelParams, line: ComplexLine, z: complex, center
) -> complex:
    """Evaluate phi at distance-from-``center`` along the complexified line.

    Returns exp(beta * Log(w)) with w = 1 + eps^(2k) * q(z)^k and Log the
    principal logarithm.  Raises :class:`BranchViolationError` when w falls
    on the branch point (|w| below a relative tolerance) or exactly on the
    nonpositive real axis; no automatic branch switching is ever performed.
    """
    q = complex_line_norm_sq(line, z, center)
    t = params.epsilon ** (2 * params.k) * q**params.k
    w = 1.0 + t
    if abs(w) <= BRANCH_POINT_RTOL * (1.0 + abs(t)):
        raise BranchViolationError(w)
    if w.imag == 0.0 and w.real < 0.0:
        raise BranchViolationError(w)
    return cmath.exp(params.beta * cmath.log(w))
