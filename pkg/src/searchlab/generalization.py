"""Train/held-out gap experiments for the inconsistency-based guarantee.

The held-out set stands in for the expectation; the experiment watches two
things as the training-set size N grows: the per-instance domination of
suboptimality by inconsistency (exact, never allowed to fail) and the
shrinking train/held-out gap (the observable shadow of the complexity term).
"""

from __future__ import annotations

import csv
import io
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .engines import dijkstra_opt, run_astar
from .errors import CertificateViolation, ValidationError
from .inconsistency import (
    InconsistencyEvaluator,
    LearnerConfig,
    minimize_empirical_inconsistency,
)
from .instances import (
    HeuristicVector,
    InstanceDistributionSpec,
    PathInstance,
    sample_instance,
)
from .measures import UtilityMeasure, evaluate
from .rational import Rat, format_rat


@dataclass(frozen=True)
class GapExperimentConfig:
    distribution: InstanceDistributionSpec
    sizes: tuple[int, ...]
    trials: int
    mode: str = "learner"  # learner | grid
    measure: str = "subopt"
    cap: Rat = 64
    heldout_size: int = 2048
    confidence: float = 0.1
    seed: int = 0
    reopening: bool = False
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    grid_candidates: int = 32

    def __post_init__(self):
        if self.mode not in ("learner", "grid"):
            raise ValidationError(f"unknown gap mode {self.mode!r}")
        if list(self.sizes) != sorted(set(self.sizes)) or not self.sizes:
            raise ValidationError("sizes must be strictly increasing and non-empty")
        if self.trials < 1:
            raise ValidationError("need at least one trial")
        if not (0.0 < self.confidence < 1.0):
            raise ValidationError("confidence delta must be in (0, 1)")
        if self.heldout_size < 1:
            raise ValidationError("held-out set must be non-empty")


@dataclass(frozen=True)
class GapRow:
    size: int
    trial: int
    train_inc: Optional[Rat] = None
    heldout_inc: Optional[Rat] = None
    heldout_subopt: Optional[Rat] = None
    heldout_slack: Optional[Rat] = None
    max_grid_gap: Optional[Rat] = None
    mean_grid_gap: Optional[Rat] = None


@dataclass
class GapCurve:
    config: GapExperimentConfig
    rows: list[GapRow]

    def per_size_mean(self, attr: str) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for size in self.config.sizes:
            vals = [getattr(r, attr) for r in self.rows if r.size == size]
            vals = [v for v in vals if v is not None]
            if vals:
                out[size] = Fraction(sum(vals, 0), len(vals))
        return out

    def mean_abs_gap(self) -> dict[int, Fraction]:
        """Per-size mean of |train inconsistency - held-out inconsistency|."""
        out: dict[int, Fraction] = {}
        for size in self.config.sizes:
            vals = [
                abs(r.train_inc - r.heldout_inc)
                for r in self.rows
                if r.size == size and r.train_inc is not None and r.heldout_inc is not None
            ]
            if vals:
                out[size] = Fraction(sum(vals, 0), len(vals))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["N", "trial", "train_inc", "heldout_inc", "heldout_subopt", "max_grid_gap"])
        fmt = lambda v: "" if v is None else format_rat(v)
        for r in self.rows:
            writer.writerow(
                [r.size, r.trial, fmt(r.train_inc), fmt(r.heldout_inc), fmt(r.heldout_subopt), fmt(r.max_grid_gap)]
            )
        return buf.getvalue()


def _train_offset(config: GapExperimentConfig, size: int, trial: int) -> int:
    # Disjoint, position-computable index blocks: held-out first, then one
    # block of sum(sizes) instances per trial.
    ladder = list(config.sizes)
    per_trial = sum(ladder)
    before = sum(n for n in ladder if n < size)
    return config.heldout_size + trial * per_trial + before


# Per-process cache of (held-out pool, its evaluator), so parallel workers
# rebuild the shared state once instead of shipping it per task.
_WORKER_STATE: dict = {}


def _shared_state(config: GapExperimentConfig):
    key = repr(config)
    state = _WORKER_STATE.get(key)
    if state is None:
        heldout = [sample_instance(config.distribution, i) for i in range(config.heldout_size)]
        state = (heldout, InconsistencyEvaluator(heldout))
        _WORKER_STATE.clear()
        _WORKER_STATE[key] = state
    return state


def _evaluate_heldout(
    config: GapExperimentConfig, rho: HeuristicVector
) -> tuple[Fraction, Fraction, Fraction]:
    """Mean inconsistency, mean suboptimality, and mean certificate slack; exact.

    Raises if any single instance ever shows suboptimality above its
    inconsistency: that inequality is a theorem, not a statistic.
    """
    heldout, evaluator = _shared_state(config)
    inc_total: Rat = 0
    sub_total: Rat = 0
    for k, x in enumerate(heldout):
        delta = evaluator.delta(rho, k)
        trace = run_astar(x, rho, reopening=config.reopening, record=False)
        subopt = trace.cost - dijkstra_opt(x).cost
        if subopt > delta:
            raise CertificateViolation(
                f"held-out instance {k}: suboptimality {subopt} exceeds inconsistency {delta}"
            )
        inc_total += delta
        sub_total += subopt
    n = len(heldout)
    return Fraction(inc_total, n), Fraction(sub_total, n), Fraction(inc_total - sub_total, n)


def _learner_trial(args) -> GapRow:
    config, size, trial = args
    base = _train_offset(config, size, trial)
    train = [sample_instance(config.distribution, base + j) for j in range(size)]
    result = minimize_empirical_inconsistency(train, config.learner)
    inc, subopt, slack = _evaluate_heldout(config, result.rho)
    return GapRow(
        size=size,
        trial=trial,
        train_inc=result.best_objective,
        heldout_inc=inc,
        heldout_subopt=subopt,
        heldout_slack=slack,
    )


def _grid_candidate_pool(config: GapExperimentConfig, vertices: tuple[str, ...]) -> list[HeuristicVector]:
    rng = random.Random(f"grid:{config.seed}")
    candidates = [HeuristicVector({v: 0 for v in vertices})]
    while len(candidates) < config.grid_candidates:
        values = {v: rng.randint(0, 4 * len(vertices)) for v in vertices}
        shift = min(values.values())  # canonicalize: shifts never change behavior
        candidates.append(HeuristicVector({v: q - shift for v, q in values.items()}))
    return candidates


def _measure_mean(config: GapExperimentConfig, instances, rho) -> Fraction:
    measure = UtilityMeasure(kind=config.measure, cap=config.cap)
    total: Rat = 0
    for x in instances:
        trace = run_astar(x, rho, reopening=config.reopening, record=False)
        total += evaluate(measure, x, trace).value
    return Fraction(total, len(instances))


def run_gap_experiment(config: GapExperimentConfig, jobs: int = 1) -> GapCurve:
    """Deterministic given its config; trials merge by (size, trial) index."""
    if config.mode == "learner":
        work = [(config, size, trial) for size in config.sizes for trial in range(config.trials)]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                rows = list(ex.map(_learner_trial, work))
        else:
            rows = [_learner_trial(item) for item in work]
        return GapCurve(config=config, rows=rows)

    heldout, _ = _shared_state(config)
    candidates = _grid_candidate_pool(config, heldout[0].vertices)
    heldout_means = [_measure_mean(config, heldout, rho) for rho in candidates]
    rows = []
    for size in config.sizes:
        for trial in range(config.trials):
            base = _train_offset(config, size, trial)
            train = [sample_instance(config.distribution, base + j) for j in range(size)]
            gaps = [
                abs(_measure_mean(config, train, rho) - heldout_means[c])
                for c, rho in enumerate(candidates)
            ]
            rows.append(
                GapRow(
                    size=size,
                    trial=trial,
                    max_grid_gap=max(gaps),
                    mean_grid_gap=Fraction(sum(gaps, 0), len(gaps)),
                )
            )
    return GapCurve(config=config, rows=rows)


@dataclass
class ShapeOverlay:
    hint: str
    hint_value: float
    fitted_scale: float
    reference: dict[int, float]


def report_bound_shape(curve: GapCurve, n: int, hints: Sequence[str] = ("n-lg-n", "n2-lg-n")) -> dict:
    """Overlay C*sqrt(hint/N) reference curves on the observed mean gaps.

    C is a one-parameter least-squares fit; there is no pass/fail because the
    theory fixes only the shape, not the constant.
    """
    observed = curve.mean_abs_gap() or curve.per_size_mean("max_grid_gap")
    sizes = sorted(observed)
    if not sizes:
        raise ValidationError("curve carries no gap data")
    obs = {size: float(observed[size]) for size in sizes}
    overlays = []
    for hint in hints:
        if hint == "n-lg-n":
            value = n * math.log2(max(n, 2))
        elif hint == "n2-lg-n":
            value = n * n * math.log2(max(n, 2))
        else:
            raise ValidationError(f"unknown pdim hint {hint!r}")
        refs = {size: math.sqrt(value / size) for size in sizes}
        denom = sum(r * r for r in refs.values())
        scale = sum(obs[s] * refs[s] for s in sizes) / denom if denom else 0.0
        overlays.append(
            ShapeOverlay(
                hint=hint,
                hint_value=value,
                fitted_scale=scale,
                reference={s: scale * refs[s] for s in sizes},
            )
        )
    return {"observed": obs, "overlays": overlays}


def shape_report_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    overlays = report["overlays"]
    writer.writerow(["N", "observed_gap"] + [f"ref_{o.hint}" for o in overlays])
    for size in sorted(report["observed"]):
        writer.writerow(
            [size, repr(report["observed"][size])] + [repr(o.reference[size]) for o in overlays]
        )
    return buf.getvalue()
