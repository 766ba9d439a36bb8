"""Residual certificates for 2-isometries and Brownian unitaries.

All residuals are suprema over the first ``depth`` basis vectors of the
operator's space of ``||X e||`` for the operator identity ``X = 0`` being
tested. Every construction in this package is exact up to double rounding,
so true identities show residuals around 1e-15 while structural failures
are O(0.1) or larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    Operator,
    add_scale,
    adjoint,
    codefect,
    compose,
    defect,
    identity,
    principal_block,
    scale,
)

DEFAULT_DEPTH = 64
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class CovarianceInterval:
    lower: float
    upper: float
    depth: int

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= x <= self.upper + tol

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "depth": self.depth}


@dataclass(frozen=True)
class NormInterval:
    lower: float
    upper: float
    depth: int

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "depth": self.depth}


def _labels(t: Operator, depth: int):
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return t.domain.labels(depth)


def sup_residual(op: Operator, labels) -> float:
    """``max ||op e_l||`` over ``labels``."""
    return max((op.col(lab).norm() for lab in labels), default=0.0)


def two_isometry_operator(t: Operator) -> Operator:
    """``I - 2T*T + T*^2 T^2``."""
    ts = adjoint(t)
    tst = compose(ts, t)
    return add_scale(1.0, add_scale(1.0, identity(t.domain), -2.0, tst), 1.0, compose(ts, tst, t))


def two_isometry_residual(t: Operator, depth: int = DEFAULT_DEPTH) -> float:
    return sup_residual(two_isometry_operator(t), _labels(t, depth))


def _hermitian_norm(block: np.ndarray) -> float:
    if block.size == 0:
        return 0.0
    h = 0.5 * (block + block.conj().T)
    return float(np.max(np.abs(np.linalg.eigvalsh(h))))


def _spectral_norm(block: np.ndarray) -> float:
    if block.size == 0:
        return 0.0
    return float(np.linalg.norm(block, 2))


def covariance_bounds(t: Operator, depth: int = DEFAULT_DEPTH) -> CovarianceInterval:
    """Interval for ``cov T = sqrt(||T*T - I||)`` from a depth-``depth`` truncation.

    ``lower`` is the norm of the Hermitian principal block of the defect
    operator; principal blocks of a selfadjoint operator never exceed its
    norm and grow with depth. ``upper`` is the column-sum (Schur) bound over
    the tested columns, tightened by ``norm_hint`` when present through
    ``-1 <= T*T - I <= ||T||^2 - 1``. The Schur value is exact for the
    diagonal defect operators every shipped builder produces.
    """
    labs = _labels(t, depth)
    d = defect(t)
    lower_sq = _hermitian_norm(principal_block(d, len(labs), labs))
    upper_sq = max((d.col(lab).abs_sum() for lab in labs), default=0.0)
    if t.norm_hint is not None:
        upper_sq = min(upper_sq, max(1.0, t.norm_hint**2 - 1.0))
    lower = math.sqrt(lower_sq)
    upper = max(math.sqrt(upper_sq), lower)
    return CovarianceInterval(lower, upper, len(labs))


def norm_bound(t: Operator, depth: int = DEFAULT_DEPTH) -> NormInterval:
    """Interval for ``||T||``.

    Lower: the larger of the principal-block spectral norm of ``T`` and the
    square root of the principal-block norm of ``T*T`` (the latter sees full
    columns). Upper: min of the Schur bound ``sqrt(|T|_1 |T|_inf)`` over the
    tested columns, ``norm_hint``, and ``sqrt(1 + cov_upper^2)``.
    """
    labs = _labels(t, depth)
    blk = principal_block(t, len(labs), labs)
    gram = principal_block(compose(adjoint(t), t), len(labs), labs)
    lower = max(_spectral_norm(blk), math.sqrt(max(_hermitian_norm(gram), 0.0)))
    col_sum = max((t.col(lab).abs_sum() for lab in labs), default=0.0)
    row_sum = max((t.adj_col(lab).abs_sum() for lab in t.codomain.labels(depth)), default=0.0)
    candidates = [math.sqrt(col_sum * row_sum)]
    if t.norm_hint is not None:
        candidates.append(t.norm_hint)
    if t.is_square:
        cov = covariance_bounds(t, depth)
        candidates.append(math.sqrt(1.0 + cov.upper**2))
    upper = max(min(candidates), lower)
    return NormInterval(lower, upper, len(labs))


@dataclass
class Certificate:
    sigma: float
    depth: int
    tol: float
    res_2iso: float
    res_ii: float | None
    res_iii: float | None
    res_iv: float | None
    unitary_res: float | None
    cov: CovarianceInterval
    isometry_res: float | None = None
    coisometry_res: float | None = None
    verdict: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("overall"))

    def failed_conditions(self) -> list[str]:
        return [k for k, v in self.verdict.items() if k != "overall" and not v]

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "depth": self.depth,
            "tol": self.tol,
            "residuals": {
                "i": self.res_2iso,
                "ii": self.res_ii,
                "iii": self.res_iii,
                "iv": self.res_iv,
                "unitary": self.unitary_res,
                "isometry": self.isometry_res,
                "coisometry": self.coisometry_res,
            },
            "cov": {"lower": self.cov.lower, "upper": self.cov.upper},
            "verdict": dict(self.verdict),
        }


def condition_operators(t: Operator, sigma: float, tol: float = DEFAULT_TOL) -> dict[str, Operator]:
    """Operators that vanish exactly when conditions (i)-(iv) hold (``sigma > 0``)."""
    if not sigma > 0:
        raise ValueError("conditions (ii)-(iv) need sigma > 0")
    s2 = sigma * sigma
    d = defect(t)
    c = codefect(t)
    p = scale(1.0 / s2, d)
    gap = add_scale(s2, identity(t.domain), -1.0, d)
    nabla = compose(gap, c, gap)
    if abs(sigma - 1.0) <= tol:
        iv = nabla
    else:
        iv = add_scale(1.0, compose(nabla, nabla), -(s2 * s2 * (s2 - 1.0)), nabla)
    return {"i": two_isometry_operator(t), "ii": compose(d, c, d), "iii": add_scale(1.0, compose(p, p), -1.0, p), "iv": iv}


def brownian_certificate(t: Operator, sigma: float, depth: int = DEFAULT_DEPTH, tol: float = DEFAULT_TOL) -> Certificate:
    """Check the algebraic characterization of a Brownian unitary of covariance ``sigma``.

    For ``sigma > 0`` the four tested identities are

    (i)   ``T*^2 T^2 - 2T*T + I = 0``
    (ii)  ``D (TT* - I) D = 0`` with ``D = T*T - I``
    (iii) ``P^2 = P`` for ``P = D / sigma^2``
    (iv)  ``N^2 = sigma^4 (sigma^2 - 1) N`` for ``N = (sigma^2 - D)(TT* - I)(sigma^2 - D)``,
          replaced by ``N = 0`` when ``|sigma - 1| <= tol``,

    plus agreement of the covariance interval with ``sigma``. For
    ``sigma = 0`` the operator must be unitary.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    labs = _labels(t, depth)
    cov = covariance_bounds(t, depth)
    res_i = sup_residual(two_isometry_operator(t), labs)
    d = defect(t)
    c = codefect(t)

    if sigma == 0:
        iso = sup_residual(d, labs)
        coiso = sup_residual(c, labs)
        unitary = max(iso, coiso)
        verdict = {"i": res_i <= tol, "unitary": unitary <= tol}
        verdict["overall"] = all(verdict.values())
        return Certificate(sigma, len(labs), tol, res_i, None, None, None, unitary, cov, iso, coiso, verdict)

    ops = condition_operators(t, sigma, tol)
    res_ii, res_iii, res_iv = (sup_residual(ops[k], labs) for k in ("ii", "iii", "iv"))

    verdict = {
        "i": res_i <= tol,
        "ii": res_ii <= tol,
        "iii": res_iii <= tol,
        "iv": res_iv <= tol,
        "cov": abs(cov.lower - sigma) <= tol and cov.upper <= sigma + tol,
    }
    verdict["overall"] = all(verdict.values())
    return Certificate(sigma, len(labs), tol, res_i, res_ii, res_iii, res_iv, None, cov, verdict=verdict)
