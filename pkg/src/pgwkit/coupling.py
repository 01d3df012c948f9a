"""Coupling matrices and membership tests for the four feasible families.

Families
--------
EXACT      marginals equal the targets; total mass one.
RELAXED    marginals dominated by ``(1 + eps_i)`` times the targets; total one.
SYMMETRIC  two-sided density bounds per atom,
           ``mu(i) / (1 + eps) <= pi(i) <= (1 + eps) * mu(i)``; total one.
MASS       sub-coupling marginals dominated by the (unnormalized) targets;
           total mass fixed to ``delta``.

``eps = inf`` disables the corresponding bound entirely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError, StructuralError
from .mmspace import ValidationReport, Violation

TOL_FEAS = 1e-9

NEGATIVE_ENTRY = "NEGATIVE_ENTRY"
TOTAL_MISMATCH = "TOTAL_MISMATCH"
MARGINAL_X_MISMATCH = "MARGINAL_X_MISMATCH"
MARGINAL_Y_MISMATCH = "MARGINAL_Y_MISMATCH"
MARGINAL_X_UPPER = "MARGINAL_X_UPPER"
MARGINAL_X_LOWER = "MARGINAL_X_LOWER"
MARGINAL_Y_UPPER = "MARGINAL_Y_UPPER"
MARGINAL_Y_LOWER = "MARGINAL_Y_LOWER"


class Family(str, Enum):
    EXACT = "EXACT"
    RELAXED = "RELAXED"
    SYMMETRIC = "SYMMETRIC"
    MASS = "MASS"


@dataclass(frozen=True)
class RelaxParams:
    """Relaxation parameters; only the fields of the selected family matter."""

    family: Family
    eps1: float = 0.0
    eps2: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.family in (Family.RELAXED, Family.SYMMETRIC):
            if self.eps1 < 0 or self.eps2 < 0:
                raise ParameterError("relaxation eps must be nonnegative")
        if self.family is Family.MASS and self.delta < 0:
            raise ParameterError("mass parameter delta must be nonnegative")

    @staticmethod
    def exact() -> "RelaxParams":
        return RelaxParams(Family.EXACT)

    @staticmethod
    def relaxed(eps1: float, eps2: float) -> "RelaxParams":
        return RelaxParams(Family.RELAXED, eps1=float(eps1), eps2=float(eps2))

    @staticmethod
    def symmetric(eps1: float, eps2: float) -> "RelaxParams":
        return RelaxParams(Family.SYMMETRIC, eps1=float(eps1), eps2=float(eps2))

    @staticmethod
    def mass(delta: float) -> "RelaxParams":
        return RelaxParams(Family.MASS, delta=float(delta))


@dataclass(frozen=True)
class Coupling:
    """Nonnegative matrix on X x Y with cached marginals and total mass."""

    matrix: np.ndarray
    total: float = None
    marg_x: np.ndarray = None
    marg_y: np.ndarray = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise StructuralError(f"coupling matrix must be 2-d, got shape {m.shape}")
        m.setflags(write=False)
        mx = m.sum(axis=1)
        my = m.sum(axis=0)
        mx.setflags(write=False)
        my.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "total", float(m.sum()))
        object.__setattr__(self, "marg_x", mx)
        object.__setattr__(self, "marg_y", my)

    @property
    def shape(self):
        return self.matrix.shape


def marginals(c: Coupling):
    """Row sums and column sums of the coupling."""
    return c.marg_x.copy(), c.marg_y.copy()


def scale(c: Coupling, s: float) -> Coupling:
    """Entrywise multiplication; marginals and total scale with ``s``."""
    if s < 0:
        raise ParameterError("scale factor must be nonnegative")
    return Coupling(c.matrix * s)


def _bound_violation(values, bound, code, sense, out, tol):
    """Record the worst per-atom bound violation, skipping infinite bounds."""
    if np.isscalar(bound) and math.isinf(bound):
        return
    gap = values - bound if sense == "upper" else bound - values
    finite = np.isfinite(gap)
    if not finite.any():
        return
    gap = np.where(finite, gap, -math.inf)
    worst = float(gap.max())
    if worst > tol:
        out.append(Violation(code, (int(np.argmax(gap)),), worst))


def check_membership(c: Coupling, mu_x, mu_y, params: RelaxParams,
                     tol_feas: float = TOL_FEAS) -> ValidationReport:
    """Test feasibility of ``c`` for the family described by ``params``.

    Reports every violated constraint with the offending atom and magnitude.
    """
    mu_x = np.asarray(mu_x, dtype=float)
    mu_y = np.asarray(mu_y, dtype=float)
    n, m = c.shape
    if mu_x.shape != (n,) or mu_y.shape != (m,):
        raise StructuralError(
            f"marginal targets {mu_x.shape}/{mu_y.shape} do not match coupling {c.shape}"
        )
    out = []
    neg = -c.matrix.min(initial=0.0)
    if neg > tol_feas:
        i, j = np.unravel_index(np.argmin(c.matrix), c.shape)
        out.append(Violation(NEGATIVE_ENTRY, (int(i), int(j)), float(neg)))

    fam = params.family
    if fam is Family.EXACT:
        _marginal_equality(c, mu_x, mu_y, out, tol_feas)
        _total(c, 1.0, out, tol_feas)
    elif fam is Family.RELAXED:
        up_x = math.inf if math.isinf(params.eps1) else (1.0 + params.eps1) * mu_x
        up_y = math.inf if math.isinf(params.eps2) else (1.0 + params.eps2) * mu_y
        _bound_violation(c.marg_x, up_x, MARGINAL_X_UPPER, "upper", out, tol_feas)
        _bound_violation(c.marg_y, up_y, MARGINAL_Y_UPPER, "upper", out, tol_feas)
        _total(c, 1.0, out, tol_feas)
    elif fam is Family.SYMMETRIC:
        # per-atom box mu/(1+eps) <= pi <= (1+eps) mu; eps = inf drops both sides
        if not math.isinf(params.eps1):
            r1 = 1.0 + params.eps1
            _bound_violation(c.marg_x, r1 * mu_x, MARGINAL_X_UPPER, "upper", out, tol_feas)
            _bound_violation(c.marg_x, mu_x / r1, MARGINAL_X_LOWER, "lower", out, tol_feas)
        if not math.isinf(params.eps2):
            r2 = 1.0 + params.eps2
            _bound_violation(c.marg_y, r2 * mu_y, MARGINAL_Y_UPPER, "upper", out, tol_feas)
            _bound_violation(c.marg_y, mu_y / r2, MARGINAL_Y_LOWER, "lower", out, tol_feas)
        _total(c, 1.0, out, tol_feas)
    elif fam is Family.MASS:
        _bound_violation(c.marg_x, mu_x, MARGINAL_X_UPPER, "upper", out, tol_feas)
        _bound_violation(c.marg_y, mu_y, MARGINAL_Y_UPPER, "upper", out, tol_feas)
        _total(c, params.delta, out, tol_feas)
    else:  # pragma: no cover
        raise ParameterError(f"unknown family {fam}")
    return ValidationReport.from_violations(out)


def _marginal_equality(c, mu_x, mu_y, out, tol):
    dx = np.abs(c.marg_x - mu_x)
    if dx.max(initial=0.0) > tol:
        i = int(np.argmax(dx))
        out.append(Violation(MARGINAL_X_MISMATCH, (i,), float(dx[i])))
    dy = np.abs(c.marg_y - mu_y)
    if dy.max(initial=0.0) > tol:
        j = int(np.argmax(dy))
        out.append(Violation(MARGINAL_Y_MISMATCH, (j,), float(dy[j])))


def _total(c, target, out, tol):
    gap = abs(c.total - target)
    if gap > tol:
        out.append(Violation(TOTAL_MISMATCH, (), float(gap)))


def feasibility_residual(c: Coupling, mu_x, mu_y, params: RelaxParams) -> float:
    """Largest constraint violation magnitude (0 when feasible)."""
    report = check_membership(c, mu_x, mu_y, params, tol_feas=0.0)
    if report.ok:
        return 0.0
    return max(v.magnitude for v in report.violations)


def product_coupling(mu_x, mu_y, total: float = None) -> Coupling:
    """Outer product of the targets, rescaled to the requested total mass.

    With probability targets and ``total=None`` this is the usual product
    coupling (marginals equal the targets).
    """
    mu_x = np.asarray(mu_x, dtype=float)
    mu_y = np.asarray(mu_y, dtype=float)
    m = np.outer(mu_x, mu_y)
    if total is not None:
        s = m.sum()
        m = m * (total / s) if s > 0 else np.zeros_like(m)
    return Coupling(m)
