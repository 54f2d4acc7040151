"""Minimax-fair linear classification over data groups.

``Phi(x, y) = sum_i y_i * (average hinge loss of group i at x)`` with
``y`` on the probability simplex, so the adversary concentrates weight on
the worst-off group.  The x-prox is the weighted-hinge proximal problem,
solved as a QP after introducing one slack variable per data point.
"""

from dataclasses import dataclass

import numpy as np

from ..problem import ProblemConstants, SaddleProblem
from ..prox import project_simplex
from ..qp import QpProblem, QpStatus, solve_qp

__all__ = ["Group", "FairnessProblem"]

_FEAS_TOL = 1e-8


@dataclass(frozen=True)
class Group:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labs = np.asarray(self.labels, dtype=float)
        if feats.ndim != 2 or feats.shape[0] == 0:
            raise ValueError("each group needs at least one sample")
        if labs.shape != (feats.shape[0],) or not np.all(np.isin(labs, (-1.0, 1.0))):
            raise ValueError("labels must be +-1, one per sample")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    @property
    def size(self) -> int:
        return self.features.shape[0]


class FairnessProblem(SaddleProblem):
    def __init__(self, groups: list[Group]):
        if not groups:
            raise ValueError("at least one group required")
        dims = {g.features.shape[1] for g in groups}
        if len(dims) != 1:
            raise ValueError("all groups must share the feature dimension")
        self.groups = list(groups)
        self.dim_x = dims.pop()
        self.dim_y = len(groups)
        # rows b_ij * a_ij stacked over groups; margins are 1 - signed @ x
        self.signed = np.vstack([g.labels[:, None] * g.features for g in groups])
        self.row_group = np.concatenate(
            [np.full(g.size, i) for i, g in enumerate(groups)]
        )
        self.group_sizes = np.array([g.size for g in groups], dtype=float)
        self.row_weight = 1.0 / self.group_sizes[self.row_group]
        l_yx = float(np.sqrt(sum(
            float(np.sum(g.features**2)) / g.size for g in groups
        )))
        self.constants = ProblemConstants(l_yx=l_yx, l_yy=0.0, mu=0.0, nu=0.0)
        self._row_sq = np.maximum(np.einsum("ij,ij->i", self.signed, self.signed), 1e-12)
        self._qp_template = self._build_qp_template()

    def _build_qp_template(self):
        d, n_rows = self.dim_x, self.signed.shape[0]
        dim = d + n_rows
        q_mat = np.zeros((dim, dim))
        q_mat[:d, :d] = np.eye(d)
        g_mat = np.zeros((2 * n_rows, dim))
        g_mat[:n_rows, d:] = np.eye(n_rows)
        g_mat[n_rows:, :d] = self.signed
        g_mat[n_rows:, d:] = np.eye(n_rows)
        h_vec = np.concatenate([np.zeros(n_rows), np.ones(n_rows)])
        return q_mat, g_mat, h_vec

    def group_losses(self, x) -> np.ndarray:
        """Average hinge loss of each group at ``x``."""
        hinge = np.maximum(0.0, 1.0 - self.signed @ np.asarray(x, float))
        sums = np.bincount(self.row_group, weights=hinge, minlength=self.dim_y)
        return sums / self.group_sizes

    def grad_y(self, x, y):
        return self.group_losses(x)

    def prox_phi_x(self, tau, y, x):
        """Slack-variable QP for the weighted-hinge prox; returns ``u``.

        The classifier part of the quadratic is strictly convex, and every
        slack stays pinned by one of its two lower bounds (those pins have
        nonnegative multipliers), so the active-set solver is warm-started
        with pins predicted by a few fixed-point passes on the hinge set
        (prediction quality only affects speed, not the solution).
        """
        x = np.asarray(x, float)
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        if tau == 0.0:
            return x.copy()
        d, n_rows = self.dim_x, self.signed.shape[0]
        q_mat, g_mat, h_vec = self._qp_template
        weights = tau * np.asarray(y, float)[self.row_group] * self.row_weight
        q_vec = np.concatenate([-x, weights])
        problem = QpProblem(q_matrix=q_mat, q_vector=q_vec,
                            ineq_matrix=g_mat, ineq_vector=h_vec)
        lam = weights * ((1.0 - self.signed @ x) > 0.0)
        u_guess = x + self.signed.T @ lam
        for _ in range(12):
            resid = 1.0 - self.signed @ u_guess
            lam = np.clip(lam + 0.4 * resid / self._row_sq, 0.0, weights)
            u_guess = x + self.signed.T @ lam
        margins = 1.0 - self.signed @ u_guess
        start = np.concatenate([u_guess, np.maximum(margins, 0.0)])
        pins = np.where(margins > 0.0, np.arange(n_rows) + n_rows, np.arange(n_rows))
        result = solve_qp(problem, tol=1e-9, start=start,
                          initial_active=tuple(int(i) for i in pins))
        if result.status is not QpStatus.OPTIMAL:
            raise RuntimeError(f"hinge prox QP ended with status {result.status}")
        return result.x[:d]

    def prox_g(self, sigma, v):
        return project_simplex(v)

    def phi_value(self, x, y):
        return float(np.asarray(y, float) @ self.group_losses(x))

    def g_value(self, y):
        y = np.asarray(y, float)
        if abs(float(np.sum(y)) - 1.0) > _FEAS_TOL or float(np.min(y)) < -_FEAS_TOL:
            return np.inf
        return 0.0

    def sample_point(self, rng):
        return rng.standard_normal(self.dim_x), rng.dirichlet(np.ones(self.dim_y))

    def check_start(self, x0, y0):
        super().check_start(x0, y0)
        if self.g_value(y0) == np.inf:
            raise ValueError("y0 must lie on the probability simplex")

    def accuracy(self, x, features, labels) -> float:
        """Percent of points with ``sign(a'x)`` matching the label; sign(0) -> +1."""
        scores = np.asarray(features, float) @ np.asarray(x, float)
        predicted = np.where(scores >= 0.0, 1.0, -1.0)
        return 100.0 * float(np.mean(predicted == np.asarray(labels, float)))
