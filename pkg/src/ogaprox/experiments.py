"""Experiment drivers: cone toy problem, synthetic linear-rate study,
multi-kernel SVM training and minimax-fair classification.

Each driver is a pure function of (data, options, seed) returning
:class:`~ogaprox.report.RunReport` objects; the CLI is a thin wrapper
that parses a config file and writes the reports out.  All randomness is
drawn from per-(experiment, run) Philox streams, so a seed reproduces
every output bit-exactly.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .datasets import LoadedDataset, train_test_split
from .problem import SaddleProblem, validate_problem
from .problems import (
    BilinearProblem,
    FairnessProblem,
    Group,
    MkSvmProblem,
    QuadraticSaddleProblem,
    ToyProblem,
    mksvm_predict,
    random_toy_problem,
)
from .problems.mksvm import (
    conjugated_kernels,
    gaussian_kernel,
    linear_kernel,
    normalize_kernel,
    polynomial_kernel,
)
from .report import MetricRecord, RunReport
from .rng import experiment_rng, make_rng
from .schedule import (
    ADAPTIVE_SIGMA0_FACTOR,
    LinearSchedule,
    advance_schedule,
    balanced_alpha,
    default_adaptive,
    default_c_alpha,
    default_constant,
    default_linear,
    make_schedule,
)
from .solver import (
    SolverState,
    ergodic_pair,
    gap_certificate,
    initial_distance,
    run,
    step,
)

__all__ = [
    "log_checkpoints",
    "toy_experiment",
    "synthetic_experiment",
    "mksvm_experiment",
    "fairness_experiment",
    "validation_experiment",
    "MKSVM_VARIANTS",
    "ToyOutcome",
    "SyntheticOutcome",
    "MksvmOutcome",
    "FairnessOutcome",
]


def log_checkpoints(max_iter: int, per_decade: int = 20) -> list[int]:
    """Ascending, duplicate-free, roughly log-spaced iteration counts."""
    if max_iter < 1:
        return []
    decades = max(1.0, np.log10(max_iter))
    points = max(2, int(round(per_decade * decades)))
    grid = np.unique(np.round(10 ** np.linspace(0.0, np.log10(max_iter), points)).astype(int))
    return [int(k) for k in grid if 1 <= k <= max_iter]


# -- toy problem -------------------------------------------------------------

@dataclass
class ToyOutcome:
    report: RunReport
    problem: ToyProblem
    saddle: tuple[np.ndarray, np.ndarray]
    x0: np.ndarray
    y0: np.ndarray
    d0: float
    kind: object
    elapsed: float


def toy_experiment(
    seed: int,
    nu: float,
    d: int = 250,
    n: int = 350,
    max_iter: int = 10_000,
    checkpoints: list[int] | None = None,
    tau0: float | None = None,
    sigma0: float | None = None,
) -> ToyOutcome:
    """Cone problem run: constant schedule for ``nu = 0``, adaptive otherwise.

    The matrix has entries uniform on [-3, 3]; starting points are uniform
    on [-5, 5], with ``y0`` projected onto the cone to make it feasible.
    Two calls with the same seed but different ``nu`` share the instance
    and the starting points (the draws come first in the stream).
    """
    rng = experiment_rng(seed, "toy", 0)
    problem = random_toy_problem(d, n, nu, rng)
    x0 = rng.uniform(-5.0, 5.0, d)
    y0 = problem.prox_g(1.0, rng.uniform(-5.0, 5.0, n))
    saddle = problem.saddle_point()
    if nu > 0:
        # the generic sigma0 default (0.9-product at tau0 = 1/l_yx) keeps
        # nu*sigma0 so small here that the adaptive contraction only shows
        # beyond the measurement window; put sigma0 at a quarter of its
        # admissible cap and let tau0 absorb the product condition instead
        consts = problem.constants
        if sigma0 is None:
            sigma0 = 0.25 * ADAPTIVE_SIGMA0_FACTOR / nu
        if tau0 is None:
            c_alpha = default_c_alpha(consts)
            room = 0.9 / sigma0 - 2.0 * consts.l_yy
            if room <= 0 or consts.l_yx <= 0:
                raise ValueError("sigma0 leaves no room for a positive tau0")
            tau0 = room / (c_alpha * consts.l_yx)
        kind = default_adaptive(problem.constants, tau0=tau0, sigma0=sigma0)
        sched0 = (kind.tau0, kind.sigma0)
    else:
        kind = default_constant(problem.constants, tau0=tau0, sigma0=sigma0)
        sched0 = (kind.tau, kind.sigma)
    d0 = initial_distance(saddle, x0, y0, *sched0)
    marks = set(checkpoints if checkpoints is not None else log_checkpoints(max_iter))

    def metrics(k, state, sched):
        if k not in marks:
            return None
        erg = ergodic_pair(state, sched)
        out = {"gap": problem.gap_value(saddle, erg),
               "dist_x": float(np.linalg.norm(state.x - saddle[0]))}
        if nu > 0:
            out["dist_y"] = float(np.linalg.norm(state.y - saddle[1]))
        return out

    started = time.perf_counter()
    result = run(problem, kind, x0, y0, max_iter, callbacks=(metrics,))
    elapsed = time.perf_counter() - started
    report = result.report
    report.config = {
        "experiment": "toy", "seed": seed, "d": d, "n": n, "nu": nu,
        "max_iter": max_iter, "tau0": sched0[0], "sigma0": sched0[1],
        "d0": d0,
    }
    return ToyOutcome(report=report, problem=problem, saddle=saddle, x0=x0,
                      y0=y0, d0=d0, kind=kind, elapsed=elapsed)


# -- synthetic strongly convex-strongly concave ------------------------------

@dataclass
class SyntheticOutcome:
    report: RunReport
    problem: QuadraticSaddleProblem
    saddle: tuple[np.ndarray, np.ndarray]
    kind: LinearSchedule
    x0: np.ndarray
    y0: np.ndarray
    d0: float
    certificate_ok: bool
    max_ratio: float
    elapsed: float


def synthetic_experiment(
    seed: int,
    dim: int = 40,
    max_iter: int = 500,
    theta: float = 0.9,
    record_every: int = 1,
) -> SyntheticOutcome:
    """Quadratic instance with unit coupling norm, mu = nu = 1.

    Runs the linear-rate schedule with the balanced Young weight and
    checks the full linear certificate at every iteration.  ``theta``
    defaults to 0.9 rather than the midpoint rule so the certified
    quantities stay above double-precision noise through 500 iterations.
    """
    rng = experiment_rng(seed, "synthetic", 0)
    a = rng.standard_normal((dim, dim))
    a /= np.linalg.svd(a, compute_uv=False)[0]
    problem = QuadraticSaddleProblem(
        a, rng.standard_normal(dim), rng.standard_normal(dim), mu=1.0, nu=1.0
    )
    saddle = problem.saddle_point()
    kind = LinearSchedule(theta=theta, alpha=balanced_alpha(problem.constants))
    x0 = rng.standard_normal(dim)
    y0 = rng.standard_normal(dim)

    started = time.perf_counter()
    state = SolverState.initial(problem, x0, y0)
    sched = make_schedule(kind, problem.constants)
    d0 = initial_distance(saddle, x0, y0, sched.tau0, sched.sigma0)
    report = RunReport()
    ok = True
    max_ratio = 0.0
    for k in range(1, max_iter + 1):
        state = step(problem, state, sched)
        sched = advance_schedule(sched, kind, problem.constants)
        cert = gap_certificate(problem, saddle, state.ergodic(sched.t_sum),
                               sched, kind, x0, y0, final=(state.x, state.y))
        ratio = cert.lhs / cert.bound if cert.bound > 0 else np.inf
        max_ratio = max(max_ratio, ratio)
        ok = ok and cert.lhs <= cert.bound * (1 + 1e-8)
        if k % record_every == 0 or k == max_iter:
            report.add(MetricRecord(
                k=k, gap=cert.gap,
                dist_x=float(np.linalg.norm(state.x - saddle[0])),
                dist_y=float(np.linalg.norm(state.y - saddle[1])),
                theta=sched.theta, tau=sched.tau, sigma=sched.sigma,
            ))
    elapsed = time.perf_counter() - started
    report.config = {
        "experiment": "synthetic", "seed": seed, "dim": dim,
        "max_iter": max_iter, "theta": theta, "alpha": kind.alpha,
        "d0": d0, "certificate_ok": ok, "max_certificate_ratio": max_ratio,
    }
    return SyntheticOutcome(report=report, problem=problem, saddle=saddle,
                            kind=kind, x0=x0, y0=y0, d0=d0, certificate_ok=ok,
                            max_ratio=max_ratio, elapsed=elapsed)


# -- multi-kernel SVM --------------------------------------------------------

MKSVM_VARIANTS = {
    "c1": {"mu": 0.0, "nu": 0.0},
    "a": {"mu": 0.0, "nu": 0.5},
    "c2": {"mu": 1.0, "nu": 0.5},
}


@dataclass
class MksvmOutcome:
    report: RunReport
    per_run: list[dict[int, float]]
    aggregated: dict[int, float]
    elapsed: float


def _build_kernels(features: np.ndarray) -> list[np.ndarray]:
    return [
        normalize_kernel(polynomial_kernel(features)),
        normalize_kernel(gaussian_kernel(features)),
        normalize_kernel(linear_kernel(features)),
    ]


def mksvm_experiment(
    data: LoadedDataset,
    variant: str = "c1",
    seed: int = 0,
    runs: int = 12,
    checkpoints: tuple[int, ...] = (250, 500, 1000, 1500, 2000),
    box_c: float = 1.0,
    split_fraction: float = 0.8,
    tau0: float | None = None,
    sigma0: float | None = None,
) -> MksvmOutcome:
    """Multi-kernel SVM accuracy study on one dataset.

    Per run: fresh 80/20 split, polynomial/Gaussian/linear kernels built
    over all rows and unit-diagonal normalized, the dual iterate starts
    at zero and the kernel weights at the simplex center.  Test-set
    accuracy is measured at the checkpoints; the aggregate over the runs
    drops exactly one minimum and one maximum per checkpoint.
    """
    if variant not in MKSVM_VARIANTS:
        raise ValueError(f"variant must be one of {sorted(MKSVM_VARIANTS)}")
    mu, nu = MKSVM_VARIANTS[variant]["mu"], MKSVM_VARIANTS[variant]["nu"]
    checkpoints = tuple(sorted(checkpoints))
    max_iter = checkpoints[-1]
    kernels = _build_kernels(data.features)
    traces = np.array([np.trace(k) for k in kernels])
    c_total = float(np.sum(traces))

    started = time.perf_counter()
    per_run: list[dict[int, float]] = []
    for run_index in range(runs):
        rng = experiment_rng(seed, "mksvm", run_index)
        train_idx, test_idx = train_test_split(data.n_rows, split_fraction, rng)
        labels_train = data.labels[train_idx]
        labels_test = data.labels[test_idx]
        mats = conjugated_kernels(kernels, train_idx, labels_train)
        problem = MkSvmProblem(mats, labels_train, box_c=box_c, mu=mu, nu=nu)
        if variant == "c1":
            kind = default_constant(problem.constants, tau0=tau0, sigma0=sigma0)
        elif variant == "a":
            kind = default_adaptive(problem.constants, tau0=tau0, sigma0=sigma0)
        else:
            kind = default_linear(problem.constants)
        x0 = np.full(problem.dim_x, 1.0 / problem.dim_x)
        y0 = np.zeros(problem.dim_y)
        scores: dict[int, float] = {}

        def accuracy(k, state, sched):
            if k not in checkpoints:
                return None
            eta = c_total * state.x / traces
            pred = mksvm_predict(kernels, train_idx, test_idx, labels_train,
                                 state.y, eta, nu=nu, box_c=box_c)
            tsa = 100.0 * float(np.mean(pred.labels == labels_test))
            scores[k] = tsa
            return {"tsa": tsa}

        run(problem, kind, x0, y0, max_iter, callbacks=(accuracy,))
        per_run.append(scores)

    aggregated = {
        k: _trimmed_mean([s[k] for s in per_run]) for k in checkpoints
    }
    elapsed = time.perf_counter() - started
    report = RunReport()
    for k in checkpoints:
        report.add(MetricRecord(k=k, tsa=aggregated[k]))
    report.config = {
        "experiment": "mksvm", "dataset": data.name, "variant": variant,
        "seed": seed, "runs": runs, "mu": mu, "nu": nu, "box_c": box_c,
        "checkpoints": list(checkpoints), "per_run": [
            {str(k): v for k, v in s.items()} for s in per_run
        ],
    }
    return MksvmOutcome(report=report, per_run=per_run, aggregated=aggregated,
                        elapsed=elapsed)


def _trimmed_mean(values: list[float]) -> float:
    """Mean after removing exactly one minimum and one maximum."""
    if len(values) <= 2:
        return float(np.mean(values))
    ordered = sorted(values)
    return float(np.mean(ordered[1:-1]))


# -- minimax-fair classification ---------------------------------------------

@dataclass
class FairnessOutcome:
    report: RunReport
    with_fairness: dict[int, dict[str, float]]
    without_fairness: dict[int, dict[str, float]]
    elapsed: float
    group_ids: list[int] = field(default_factory=list)


def _groups_from_rows(features, labels, group_vector, row_idx) -> list[Group]:
    groups = []
    for gid in np.unique(group_vector):
        rows = row_idx[group_vector[row_idx] == gid]
        if rows.size == 0:
            raise ValueError(f"group {gid} has no rows in this partition")
        groups.append(Group(features[rows], labels[rows]))
    return groups


def fairness_experiment(
    data: LoadedDataset,
    grouping: str = "sex",
    seed: int = 0,
    partitions: int = 5,
    checkpoints: tuple[int, ...] = (100, 500, 1000),
    split_fraction: float = 0.8,
) -> FairnessOutcome:
    """Worst-group-fair classifier versus plain average-loss training.

    Both classifiers are trained per partition with the constant schedule;
    accuracies (overall and per group of the held-out rows) are averaged
    over the partitions.
    """
    if grouping not in data.groups:
        raise ValueError(f"dataset has no grouping {grouping!r}")
    group_vector = data.groups[grouping]
    group_ids = [int(g) for g in np.unique(group_vector)]
    checkpoints = tuple(sorted(checkpoints))
    max_iter = checkpoints[-1]

    started = time.perf_counter()
    sums_with: dict[int, dict[str, list[float]]] = {k: {} for k in checkpoints}
    sums_without: dict[int, dict[str, list[float]]] = {k: {} for k in checkpoints}
    for part in range(partitions):
        rng = experiment_rng(seed, "fairness", part)
        train_idx, test_idx = train_test_split(data.n_rows, split_fraction, rng)
        fair_groups = _groups_from_rows(data.features, data.labels,
                                        group_vector, train_idx)
        plain_group = [Group(data.features[train_idx], data.labels[train_idx])]
        for tag, groups, sums in (
            ("with", fair_groups, sums_with),
            ("without", plain_group, sums_without),
        ):
            problem = FairnessProblem(groups)
            kind = default_constant(problem.constants)
            x0 = np.zeros(problem.dim_x)
            y0 = np.full(problem.dim_y, 1.0 / problem.dim_y)

            def tsa_metrics(k, state, sched):
                if k not in checkpoints:
                    return None
                cell = sums[k]
                overall = problem.accuracy(state.x, data.features[test_idx],
                                           data.labels[test_idx])
                cell.setdefault("overall", []).append(overall)
                for gid in group_ids:
                    rows = test_idx[group_vector[test_idx] == gid]
                    if rows.size:
                        acc = problem.accuracy(state.x, data.features[rows],
                                               data.labels[rows])
                        cell.setdefault(f"group{gid}", []).append(acc)
                return {"tsa": overall}

            run(problem, kind, x0, y0, max_iter, callbacks=(tsa_metrics,))

    # averages per key over the partitions that observed it (a group can
    # miss a small test split)
    with_avg = {k: {key: float(np.mean(vals)) for key, vals in cell.items()}
                for k, cell in sums_with.items()}
    without_avg = {k: {key: float(np.mean(vals)) for key, vals in cell.items()}
                   for k, cell in sums_without.items()}
    elapsed = time.perf_counter() - started
    report = RunReport()
    for k in checkpoints:
        report.add(MetricRecord(k=k, tsa=with_avg[k]["overall"]))
    report.config = {
        "experiment": "fairness", "dataset": data.name, "grouping": grouping,
        "seed": seed, "partitions": partitions, "checkpoints": list(checkpoints),
        "with_fairness": {str(k): v for k, v in with_avg.items()},
        "without_fairness": {str(k): v for k, v in without_avg.items()},
    }
    return FairnessOutcome(report=report, with_fairness=with_avg,
                           without_fairness=without_avg, elapsed=elapsed,
                           group_ids=group_ids)


# -- library self-check -------------------------------------------------------

def validation_experiment(seed: int = 0, trials: int = 1000) -> tuple[bool, list[str]]:
    """Validate the standing assumptions on one instance of every problem."""
    rng = make_rng(seed, 5)
    cases: list[tuple[str, SaddleProblem]] = []
    cases.append(("toy nu=0", random_toy_problem(15, 22, 0.0, rng)))
    cases.append(("toy nu=0.3", random_toy_problem(15, 22, 0.3, rng)))
    cases.append(("bilinear", BilinearProblem(rng.standard_normal((8, 8)),
                                              box=(-1.0, 1.0))))
    cases.append(("quadratic", QuadraticSaddleProblem(
        rng.standard_normal((7, 6)), rng.standard_normal(6),
        rng.standard_normal(7), mu=1.0, nu=1.0)))

    feats = rng.standard_normal((24, 4))
    labels = np.where(rng.uniform(size=24) < 0.5, -1.0, 1.0)
    labels[:2] = (1.0, -1.0)
    kernels = _build_kernels(feats)
    train_idx = np.arange(18)
    mats = conjugated_kernels(kernels, train_idx, labels[:18])
    cases.append(("mksvm", MkSvmProblem(mats, labels[:18], box_c=1.0,
                                        mu=0.5, nu=0.5)))
    cases.append(("fairness", FairnessProblem([
        Group(feats[:12], labels[:12]), Group(feats[12:], labels[12:]),
    ])))

    all_ok = True
    lines = []
    for name, problem in cases:
        report = validate_problem(problem, trials=trials, seed=seed)
        all_ok = all_ok and report.ok
        prox = "skipped" if report.prox_violation is None else f"{report.prox_violation:.3e}"
        lines.append(
            f"{'PASS' if report.ok else 'FAIL'} {name}: "
            f"lipschitz {report.lipschitz_violation:.3e}, prox {prox}"
        )
    return all_ok, lines
