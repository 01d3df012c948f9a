"""Finite metric measure spaces: data model, validation, and geometry helpers.

A space is a symmetric zero-diagonal distance matrix together with a
nonnegative weight vector. Probability spaces additionally carry unit total
mass and full support; general nonnegative weights are allowed for the
mass-constrained solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StructuralError

TOL_METRIC = 1e-9
TOL_MASS = 1e-12

# validation codes
NEGATIVE_DISTANCE = "NEGATIVE_DISTANCE"
NONFINITE_DISTANCE = "NONFINITE_DISTANCE"
ASYMMETRY = "ASYMMETRY"
NONZERO_DIAGONAL = "NONZERO_DIAGONAL"
TRIANGLE_VIOLATION = "TRIANGLE_VIOLATION"
NEGATIVE_WEIGHT = "NEGATIVE_WEIGHT"
NONFINITE_WEIGHT = "NONFINITE_WEIGHT"
ZERO_TOTAL_MASS = "ZERO_TOTAL_MASS"
MASS_NOT_ONE = "MASS_NOT_ONE"
ZERO_WEIGHT_ATOM = "ZERO_WEIGHT_ATOM"


@dataclass(frozen=True)
class Violation:
    code: str
    indices: tuple
    magnitude: float


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    @staticmethod
    def from_violations(violations) -> "ValidationReport":
        violations = tuple(violations)
        return ValidationReport(ok=not violations, violations=violations)

    def codes(self):
        return {v.code for v in self.violations}


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MMSpace:
    """Finite mm-space: ``dist`` is n-by-n, ``weights`` has length n.

    Construction only checks shapes; call :func:`validate` for the metric
    and mass invariants. Instances are immutable and safe to share.
    """

    dist: np.ndarray
    weights: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        d = _readonly(self.dist)
        w = _readonly(self.weights)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise StructuralError(f"distance matrix must be square, got shape {d.shape}")
        if w.ndim != 1 or w.shape[0] != d.shape[0]:
            raise StructuralError(
                f"weights length {w.shape} does not match distance matrix {d.shape}"
            )
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != d.shape[0]:
                raise StructuralError("labels length does not match number of atoms")
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def normalized(self) -> "MMSpace":
        """Return the space with weights rescaled to total mass one."""
        t = self.total_mass
        if t <= 0:
            raise ParameterError("cannot normalize a space with zero total mass")
        return MMSpace(self.dist, self.weights / t, self.labels)


def validate(space: MMSpace, require_probability: bool = False,
             tol_metric: float = TOL_METRIC, tol_mass: float = TOL_MASS) -> ValidationReport:
    """Check all space invariants; report the worst offender per code.

    ``require_probability`` additionally demands unit total mass (within
    ``tol_mass``) and full support. Never mutates the input.
    """
    d, w = space.dist, space.weights
    n = space.n
    out = []

    bad = ~np.isfinite(d)
    if bad.any():
        i, j = np.unravel_index(np.argmax(bad), d.shape)
        out.append(Violation(NONFINITE_DISTANCE, (int(i), int(j)), math.inf))
        d = np.where(bad, 0.0, d)
    if (d < 0).any():
        i, j = np.unravel_index(np.argmin(d), d.shape)
        out.append(Violation(NEGATIVE_DISTANCE, (int(i), int(j)), float(-d[i, j])))
    asym = np.abs(d - d.T)
    if asym.max(initial=0.0) > tol_metric:
        i, j = np.unravel_index(np.argmax(asym), d.shape)
        out.append(Violation(ASYMMETRY, (int(i), int(j)), float(asym[i, j])))
    diag = np.abs(np.diag(d))
    if diag.max(initial=0.0) > tol_metric:
        i = int(np.argmax(diag))
        out.append(Violation(NONZERO_DIAGONAL, (i, i), float(diag[i])))
    if n >= 3:
        # worst triangle defect  d(i,j) - d(i,k) - d(k,j)
        via = d[:, :, None] + d[None, :, :]          # (i,k,j) -> d(i,k)+d(k,j)
        defect = d[:, None, :] - via                 # (i,k,j)
        worst = float(defect.max())
        if worst > tol_metric:
            i, k, j = np.unravel_index(np.argmax(defect), defect.shape)
            out.append(Violation(TRIANGLE_VIOLATION, (int(i), int(j), int(k)), worst))

    badw = ~np.isfinite(w)
    if badw.any():
        out.append(Violation(NONFINITE_WEIGHT, (int(np.argmax(badw)),), math.inf))
        w = np.where(badw, 0.0, w)
    if (w < 0).any():
        i = int(np.argmin(w))
        out.append(Violation(NEGATIVE_WEIGHT, (i,), float(-w[i])))
    total = float(w.sum())
    if total <= 0:
        out.append(Violation(ZERO_TOTAL_MASS, (), abs(total)))
    if require_probability:
        if abs(total - 1.0) > tol_mass:
            out.append(Violation(MASS_NOT_ONE, (), abs(total - 1.0)))
        if (w <= 0).any():
            i = int(np.argmin(w))
            out.append(Violation(ZERO_WEIGHT_ATOM, (i,), float(max(0.0, -w[i]))))
    return ValidationReport.from_violations(out)


def eccentricity(space: MMSpace, p: float) -> np.ndarray:
    """Per-atom L^p norm of the distance function under the space's measure.

    For ``p = inf`` this is the max distance over the support of the weights.
    """
    if p < 1:
        raise ParameterError(f"p must lie in [1, inf], got {p}")
    d, w = space.dist, space.weights
    if math.isinf(p):
        support = w > 0
        if not support.any():
            raise ParameterError("eccentricity needs at least one positive weight")
        return d[:, support].max(axis=1)
    return (d**p @ w) ** (1.0 / p)


def circumradius(space: MMSpace, p: float) -> float:
    """Minimum eccentricity; the inf is attained on finite spaces."""
    return float(eccentricity(space, p).min())


def simplex_space(n: int) -> MMSpace:
    """Uniform n-point space with all off-diagonal distances equal to one."""
    if n < 1:
        raise ParameterError(f"simplex_space needs n >= 1, got {n}")
    return MMSpace(1.0 - np.eye(n), np.full(n, 1.0 / n))


def two_point_space(mass_first: float, distance: float = 1.0) -> MMSpace:
    """Two points at the given distance with weights (mass_first, 1 - mass_first)."""
    if not 0.0 < mass_first < 1.0:
        raise ParameterError("mass_first must lie in (0, 1)")
    d = np.array([[0.0, distance], [distance, 0.0]])
    return MMSpace(d, np.array([mass_first, 1.0 - mass_first]))


def relabel(space: MMSpace, permutation) -> MMSpace:
    """Apply a relabeling of atoms; the result is isomorphic by construction."""
    perm = np.asarray(permutation, dtype=int)
    n = space.n
    if perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
        raise ParameterError("permutation must be a bijection on {0..n-1}")
    labels = None
    if space.labels is not None:
        labels = tuple(space.labels[i] for i in perm)
    return MMSpace(space.dist[np.ix_(perm, perm)], space.weights[perm], labels)
