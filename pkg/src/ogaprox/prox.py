"""Proximal operators and Euclidean projections used by the model problems.

The closed-form operators (simplex, box-and-hyperplane, scaled positive
part) are exact finite algorithms.  Projection onto a polyhedral cone
``{y : A y >= 0}`` is available twice: through the dense QP solver
(:func:`project_polytope`) and through a dual nonnegative least-squares
method (:class:`PolytopeProjector`) that is fast enough for solver inner
loops.  The two routes are cross-checked in the test suite.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .qp import QpProblem, QpStatus, solve_qp
from .rng import make_rng

__all__ = [
    "BoxHyperplaneSet",
    "PolytopeSet",
    "PolytopeProjector",
    "project_simplex",
    "project_box_hyperplane",
    "project_polytope",
    "prox_positive_part_scaled",
    "prox_oracle",
]


class InfeasibleSetError(ValueError):
    """The constraint set is empty."""


class RootFindingError(RuntimeError):
    """Scalar dual search failed to converge."""


def _as_vector(v, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the unit simplex.

    Uses the sort-and-threshold method, an exact finite algorithm: the
    output is nonnegative and sums to one up to roundoff.
    """
    x = _as_vector(v)
    u = np.sort(x)[::-1]
    cumulative = np.cumsum(u) - 1.0
    rho_candidates = np.nonzero(u * np.arange(1, x.size + 1) > cumulative)[0]
    rho = rho_candidates[-1]
    threshold = cumulative[rho] / (rho + 1.0)
    return np.maximum(x - threshold, 0.0)


@dataclass(frozen=True)
class BoxHyperplaneSet:
    """Intersection ``{lower <= y <= upper, <y, normal> = offset}``.

    ``upper`` may be ``+inf``.  Nonemptiness is checked at construction
    via the exact interval condition on ``<y, normal>`` over the box.
    """

    lower: float
    upper: float
    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        if self.normal.ndim != 1 or self.normal.size == 0:
            raise ValueError("normal must be a nonempty vector")
        if not np.any(self.normal != 0.0):
            raise ValueError("normal must be nonzero")
        if not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")
        sum_pos = float(self.normal[self.normal > 0].sum())
        sum_neg = float(self.normal[self.normal < 0].sum())
        # guard inf * 0 when upper == +inf and one sign is absent
        lo_val = self.lower * sum_pos + (self.upper * sum_neg if sum_neg else 0.0)
        hi_val = (self.upper * sum_pos if sum_pos else 0.0) + self.lower * sum_neg
        if not (lo_val <= self.offset <= hi_val):
            raise InfeasibleSetError(
                f"offset {self.offset} outside reachable range [{lo_val}, {hi_val}]"
            )

    @property
    def dim(self) -> int:
        return self.normal.size


def project_box_hyperplane(s: BoxHyperplaneSet, v, max_bisect: int = 200) -> np.ndarray:
    """Euclidean projection onto a box intersected with a hyperplane.

    The projection is ``clip(v - t * normal, lower, upper)`` for the scalar
    dual multiplier ``t`` solving ``<y(t), normal> = offset``; the residual
    is monotone in ``t``, so ``t`` is found by bracket expansion and
    bisection (with a Newton polish on the final free set).
    """
    w = _as_vector(v)
    if w.size != s.dim:
        raise ValueError("dimension mismatch with set normal")
    n = s.normal

    def residual(t: float) -> float:
        y = np.clip(w - t * n, s.lower, s.upper)
        return float(n @ y - s.offset)

    r0 = residual(0.0)
    scale = max(1.0, abs(s.offset), float(np.abs(n) @ np.abs(w)))
    tol = 1e-12 * scale
    if abs(r0) <= tol:
        return np.clip(w, s.lower, s.upper)

    # residual is nonincreasing in t: positive residual needs larger t
    step = 1.0 + abs(r0) / max(1.0, float(n @ n))
    if r0 > 0:
        lo, hi = 0.0, step
        while residual(hi) > tol:
            hi *= 2.0
            if hi > 1e30:
                raise RootFindingError("bracket expansion failed")
    else:
        lo, hi = -step, 0.0
        while residual(lo) < -tol:
            lo *= 2.0
            if lo < -1e30:
                raise RootFindingError("bracket expansion failed")

    t = 0.5 * (lo + hi)
    for _ in range(max_bisect):
        t = 0.5 * (lo + hi)
        r = residual(t)
        if abs(r) <= tol:
            break
        if r > 0:
            lo = t
        else:
            hi = t
    else:
        raise RootFindingError(f"hyperplane residual above {tol} after {max_bisect} bisections")

    # Newton polish on the current free coordinates tightens the residual
    y = np.clip(w - t * n, s.lower, s.upper)
    free = (y > s.lower) & (y < s.upper)
    slope = float(n[free] @ n[free])
    if slope > 0.0:
        t_ref = t + (n @ y - s.offset) / slope
        y_ref = np.clip(w - t_ref * n, s.lower, s.upper)
        if abs(n @ y_ref - s.offset) <= abs(n @ y - s.offset):
            y = y_ref
    return y


@dataclass(frozen=True)
class PolytopeSet:
    """Polyhedral cone ``{y : A y >= 0}`` (always contains the origin)."""

    a_matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_matrix, dtype=float)
        if a.ndim != 2 or a.size == 0:
            raise ValueError("a_matrix must be a nonempty 2-d array")
        if not np.all(np.isfinite(a)):
            raise ValueError("a_matrix must be finite")
        object.__setattr__(self, "a_matrix", a)

    @property
    def dim(self) -> int:
        return self.a_matrix.shape[1]


def project_polytope(s: PolytopeSet, v, tol: float = 1e-10) -> np.ndarray:
    """Projection onto ``{y : A y >= 0}`` through the dense QP solver.

    The origin is always feasible and is used as the starting point.
    """
    w = _as_vector(v)
    if w.size != s.dim:
        raise ValueError("dimension mismatch with polytope")
    n = s.dim
    problem = QpProblem(
        q_matrix=np.eye(n),
        q_vector=-w,
        ineq_matrix=s.a_matrix,
        ineq_vector=np.zeros(s.a_matrix.shape[0]),
    )
    result = solve_qp(problem, tol=tol, start=np.zeros(n))
    if result.status is not QpStatus.OPTIMAL:
        raise RuntimeError(f"polytope projection QP ended with status {result.status}")
    return result.x


class PolytopeProjector:
    """Warm-startable projection onto ``{y : A y >= 0}`` for hot loops.

    Works on the dual problem ``min_{lam >= 0} 0.5 lam' A A' lam + (A v)' lam``
    (the projection is ``v + A' lam``) with the block-pivoting active-set
    scheme of Portugal--Judice--Vicente plus Murty's single-exchange
    safeguard.  The Gram matrix is factored once; consecutive calls reuse
    the previous support as a starting guess, which only affects speed,
    never the result.  Falls back to the QP route if pivoting stalls.
    """

    def __init__(self, a_matrix):
        a = np.asarray(a_matrix, dtype=float)
        if a.ndim != 2:
            raise ValueError("a_matrix must be 2-d")
        self.a = a
        self.gram = a @ a.T
        self._warm: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.a.shape[1]

    def project(self, v) -> np.ndarray:
        w = np.asarray(v, dtype=float)
        d = self.a.shape[0]
        c = self.a @ w
        if np.all(c >= 0.0):
            self._warm = np.zeros(d, dtype=bool)
            return w.copy()
        eps = 1e-12 * max(1.0, float(np.max(np.abs(c))))

        free = self._warm if self._warm is not None else (c < 0.0)
        free = free.copy()
        best_inf = np.inf
        patience = 3
        lam = np.zeros(d)
        for _ in range(10 + 3 * d):
            lam.fill(0.0)
            idx = np.flatnonzero(free)
            if idx.size:
                try:
                    lam[idx] = np.linalg.solve(self.gram[np.ix_(idx, idx)], -c[idx])
                except np.linalg.LinAlgError:
                    break
            slack = self.gram @ lam + c
            bad_free = free & (lam < -eps)
            bad_bound = ~free & (slack < -eps)
            n_bad = int(bad_free.sum() + bad_bound.sum())
            if n_bad == 0:
                self._warm = free
                lam = np.maximum(lam, 0.0)
                return w + self.a.T @ lam
            if n_bad < best_inf:
                best_inf = n_bad
                patience = 3
                free ^= bad_free | bad_bound
            elif patience > 0:
                patience -= 1
                free ^= bad_free | bad_bound
            else:
                # Murty safeguard: flip only the largest-index infeasible
                last = np.flatnonzero(bad_free | bad_bound)[-1]
                free[last] = not free[last]
        self._warm = None
        return project_polytope(PolytopeSet(self.a), w)


def prox_positive_part_scaled(tau: float, w: float, x: float) -> float:
    """Prox of ``u -> tau * w * max(0, u)`` at ``x`` for ``w >= 0``.

    Cases follow the closed intervals of the defining formula: the
    identity branch wins at ``x = 0`` and the zero branch at ``x = tau*w``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if w < 0:
        raise ValueError("weight w must be nonnegative")
    if x <= 0.0:
        return x
    if x <= tau * w:
        return 0.0
    return x - tau * w


def prox_oracle(
    f: Callable[[np.ndarray], float],
    x,
    candidate,
    trials: int = 1000,
    seed: int = 0,
    scales: tuple[float, ...] = (1e-3, 1e-1, 1.0),
) -> float:
    """Brute-force optimality check for a claimed proximal point.

    Samples Gaussian perturbations of ``candidate`` at the given scales and
    returns the largest amount by which a sample beats the candidate on
    ``f(u) + 0.5 ||u - x||^2``.  A correct prox keeps this at roundoff
    level; values above ``1e-8`` indicate a wrong operator.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    base = _as_vector(x, "x")
    cand = _as_vector(candidate, "candidate")
    if cand.size != base.size:
        raise ValueError("candidate dimension mismatch")

    def objective(u: np.ndarray) -> float:
        val = float(f(u))
        if val == -np.inf:
            raise ValueError("f takes -inf; prox undefined")
        diff = u - base
        return val + 0.5 * float(diff @ diff)

    f_cand = objective(cand)
    if f_cand == np.inf:
        return np.inf
    rng = make_rng(seed, 97)
    worst = -np.inf
    for j in range(trials):
        scale = scales[j % len(scales)]
        u = cand + scale * rng.standard_normal(cand.size)
        worst = max(worst, f_cand - objective(u))
    return worst
