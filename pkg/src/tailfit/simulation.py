"""Monte Carlo comparison of tail index estimators.

Every replication draws one ordered sample from its own random stream,
keyed by ``(alpha index, rep)``, and hands that same sample to every
estimator of the plan.  Replications can therefore run in any order and on
any number of threads; aggregation always walks the reps in ascending
order, so reports are bit-identical for a given seed.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import ConfigurationError, DomainError, NumericError
from .estimators import (
    DesignSystem,
    Power,
    RegressionConfig,
    Uniform,
    WeightSpec,
    attach_response,
    build_design,
    dedh,
    format_weight,
    hill,
    parse_weight,
    pickands,
    wls_fit,
)
from .models import Hall, OrderedSample, StrictPareto, TailModel, sample, stream, upper_quantile

__all__ = [
    "EstimatorSpec",
    "SimulationPlan",
    "CellResult",
    "SimulationReport",
    "aggregate",
    "run_plan",
    "standard_estimators",
    "quantile_grid_sample",
    "worker_count",
    "write_report_csv",
    "read_report_csv",
    "REPORT_HEADER",
]

BASELINES = {"hill": hill, "pickands": pickands, "dedh": dedh}
REPORT_HEADER = ["model", "alpha", "estimator", "params", "reps", "failed", "mean", "mse"]

Sampler = Callable[[TailModel, int, np.random.Generator], OrderedSample]


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator column: a regression config or a baseline with its k."""

    name: str
    config: Optional[RegressionConfig] = None
    k: Optional[int] = None

    def __post_init__(self):
        if self.name in ("wls", "ols"):
            if self.config is None:
                raise ConfigurationError(f"{self.name} needs a RegressionConfig")
            if self.name == "ols" and not isinstance(self.config.weight, Uniform):
                raise ConfigurationError("ols requires the uniform weight")
        elif self.name in BASELINES:
            if self.k is None or int(self.k) < 1:
                raise ConfigurationError(f"{self.name} needs a positive k")
        else:
            raise ConfigurationError(f"unknown estimator {self.name!r}")

    @classmethod
    def wls(cls, p_tilde=1, a=0.001, b=0.4, weight: WeightSpec = Power(0.002, 1.0),
            response="step") -> "EstimatorSpec":
        name = "ols" if isinstance(weight, Uniform) else "wls"
        return cls(name, RegressionConfig(a, b, p_tilde, weight, response))

    @classmethod
    def ols(cls, p_tilde=1, a=0.001, b=0.4, response="step") -> "EstimatorSpec":
        return cls("ols", RegressionConfig(a, b, p_tilde, Uniform(), response))

    @property
    def is_regression(self) -> bool:
        return self.config is not None

    @property
    def params(self) -> str:
        if self.config is None:
            return f"k={self.k}"
        c = self.config
        return (f"ptilde={c.p_tilde};a={c.a!r};b={c.b!r};"
                f"weight={format_weight(c.weight)};response={c.response}")

    @classmethod
    def from_params(cls, name: str, params: str) -> "EstimatorSpec":
        kv = dict(item.split("=", 1) for item in params.split(";") if item)
        if name in BASELINES:
            return cls(name, k=int(kv["k"]))
        config = RegressionConfig(float(kv["a"]), float(kv["b"]), int(kv["ptilde"]),
                                  parse_weight(kv["weight"]), kv.get("response", "step"))
        return cls(name, config)

    def check(self, n: int) -> Optional[DesignSystem]:
        """Validate against sample size ``n``; return the design if any."""
        if self.config is not None:
            return build_design(n, self.config)
        limit = n // 4 if self.name == "pickands" else n - 1
        if not 1 <= self.k <= limit:
            raise ConfigurationError(f"{self.name}: k={self.k} invalid for n={n}")
        return None


def standard_estimators(k: int = 200, a: float = 0.001, b: float = 0.4,
                     p_tildes: Sequence[int] = (1, 2, 3),
                     weight: WeightSpec = Power(0.002, 1.0),
                     response: str = "jth_largest") -> list[EstimatorSpec]:
    """WLS and OLS for each ``p_tilde`` followed by Hill, Pickands and DEdH."""
    out = [EstimatorSpec.wls(p, a, b, weight, response) for p in p_tildes]
    out += [EstimatorSpec.ols(p, a, b, response) for p in p_tildes]
    out += [EstimatorSpec(name, k=k) for name in ("hill", "pickands", "dedh")]
    return out


@dataclass(frozen=True)
class SimulationPlan:
    model: str = "pareto"
    alphas: tuple = (1.0,)
    n: int = 5000
    reps: int = 1000
    base_seed: int = 0
    estimators: tuple = ()
    d1: float = 0.4
    d2: float = 1.0
    beta: float = 0.01
    sampler: Optional[Sampler] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.model not in ("pareto", "hall"):
            raise ConfigurationError(f"model must be 'pareto' or 'hall', got {self.model!r}")
        if not self.alphas or not all(a > 0 and math.isfinite(a) for a in self.alphas):
            raise ConfigurationError("alphas must be a nonempty list of positive values")
        if int(self.reps) < 1:
            raise ConfigurationError("reps must be >= 1")
        if int(self.n) < 1:
            raise ConfigurationError("n must be >= 1")
        if not self.estimators:
            raise ConfigurationError("at least one estimator is required")
        labels = [(e.name, e.params) for e in self.estimators]
        if len(set(labels)) != len(labels):
            raise ConfigurationError("duplicate estimator in plan")

    def model_for(self, alpha: float) -> TailModel:
        if self.model == "pareto":
            return StrictPareto(alpha)
        return Hall(alpha, self.d1, self.d2, self.beta)


@dataclass(frozen=True)
class CellResult:
    model: str
    alpha: float
    estimator: str
    params: str
    reps: int
    failed: int
    mean: float
    mse: float

    def row(self) -> list[str]:
        return [self.model, repr(self.alpha), self.estimator, self.params,
                str(self.reps), str(self.failed), repr(self.mean), repr(self.mse)]


@dataclass
class SimulationReport:
    plan: Optional[SimulationPlan]
    cells: list
    estimates: Optional[np.ndarray] = None  # shape (alphas, reps, estimators)

    def cell(self, alpha: float, estimator: str, params: Optional[str] = None) -> CellResult:
        for c in self.cells:
            if c.alpha == alpha and c.estimator == estimator and (params is None or c.params == params):
                return c
        raise KeyError((alpha, estimator, params))

    def find(self, alpha: float, spec: EstimatorSpec) -> CellResult:
        return self.cell(float(alpha), spec.name, spec.params)

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_report_csv(self, buf)
        return buf.getvalue()


def aggregate(estimates: Iterable[float], alpha: float) -> tuple[float, float]:
    """Mean and mean squared error about ``alpha``, with exact-rounded sums."""
    x = np.asarray(list(estimates) if not isinstance(estimates, np.ndarray) else estimates,
                   dtype=np.float64)
    if x.size == 0:
        raise DomainError("cannot aggregate an empty set of estimates")
    m = x.size
    mean = math.fsum(x) / m
    dev = x - alpha
    return mean, math.fsum(dev * dev) / m


def quantile_grid_sample(model: TailModel, n: int, response: str = "step") -> OrderedSample:
    """Noiseless sample whose order statistics sit on the model quantiles.

    With ``response="step"`` ``X_{n-j,n} = Q(1 - j/n)``; with
    ``"jth_largest"`` ``X_{n-j+1,n} = Q(1 - j/n)``.  The one order statistic
    falling outside the grid is placed half a step beyond it.
    """
    k = np.arange(1, n + 1)
    s = (n - k + (1 if response == "jth_largest" else 0)) / n
    s = np.where(s <= 0, 0.5 / n, s)
    s = np.where(s >= 1, 1 - 0.5 / n, s)
    return OrderedSample(upper_quantile(model, s))


def worker_count(threads: Optional[int] = None) -> int:
    """Resolve a thread count; ``TAILFIT_THREADS`` applies when none is given."""
    if threads is None:
        env = os.environ.get("TAILFIT_THREADS", "").strip()
        threads = int(env) if env else 0
    if threads < 0:
        raise ConfigurationError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


def _evaluate(spec: EstimatorSpec, design: Optional[DesignSystem], smp: OrderedSample) -> float:
    if design is not None:
        return wls_fit(attach_response(design, smp)).alpha_hat
    return BASELINES[spec.name](smp, spec.k)


def run_plan(plan: SimulationPlan, threads: Optional[int] = None) -> SimulationReport:
    """Run every (alpha, rep) replication of ``plan`` and aggregate per cell.

    A replication in which an estimator raises :class:`NumericError` counts
    as failed for that estimator and is left out of its mean and MSE.
    """
    designs = [spec.check(plan.n) for spec in plan.estimators]
    draw = plan.sampler or sample
    n_alpha, reps, n_est = len(plan.alphas), int(plan.reps), len(plan.estimators)
    estimates = np.full((n_alpha, reps, n_est), np.nan)
    models = [plan.model_for(a) for a in plan.alphas]

    def one(task):
        ai, r = task
        smp = draw(models[ai], plan.n, stream(plan.base_seed, ai, r))
        row = estimates[ai, r]
        for e, (spec, design) in enumerate(zip(plan.estimators, designs)):
            try:
                row[e] = _evaluate(spec, design, smp)
            except NumericError:
                pass

    tasks = [(ai, r) for ai in range(n_alpha) for r in range(reps)]
    workers = min(worker_count(threads), len(tasks))
    if workers <= 1:
        for t in tasks:
            one(t)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for _ in pool.map(one, tasks, chunksize=max(1, len(tasks) // (8 * workers))):
                pass

    cells = []
    for ai, alpha in enumerate(plan.alphas):
        for e, spec in enumerate(plan.estimators):
            col = estimates[ai, :, e]
            ok = col[~np.isnan(col)]
            failed = reps - ok.size
            mean, mse = aggregate(ok, alpha) if ok.size else (math.nan, math.nan)
            cells.append(CellResult(plan.model, alpha, spec.name, spec.params,
                                    reps, failed, mean, mse))
    return SimulationReport(plan, cells, estimates)


def write_report_csv(report: SimulationReport, fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for c in report.cells:
        writer.writerow(c.row())


def read_report_csv(fh: TextIO) -> SimulationReport:
    reader = csv.reader(fh)
    header = next(reader)
    if header != REPORT_HEADER:
        raise ValueError(f"unexpected report header {header}")
    cells = [
        CellResult(m, float(a), est, params, int(reps), int(failed), float(mean), float(mse))
        for m, a, est, params, reps, failed, mean, mse in reader
    ]
    return SimulationReport(None, cells)
