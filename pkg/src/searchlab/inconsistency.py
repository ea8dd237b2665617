"""Inconsistency of a heuristic vector along canonical optimal paths.

The per-edge inconsistency max{rho_v - rho_c - w, 0}, summed over the
canonical optimal path minus its first edge, upper-bounds the suboptimality
of A* in both reopening modes. This module computes that quantity, certifies
the bound on real runs, replays the per-iteration bookkeeping the proof of
the bound relies on, and minimizes the (convex, piecewise-linear) empirical
inconsistency by subgradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .engines import (
    SearchTrace,
    dijkstra_opt,
    distances_from_start,
    distances_to_goal,
    run_astar,
)
from .errors import CertificateViolation, LedgerViolation, ValidationError
from .instances import HeuristicVector, PathInstance
from .rational import Rat, as_rat


@dataclass(frozen=True)
class InconsistencyReport:
    delta: Rat
    terms: tuple[tuple[str, str, Rat], ...]
    opt: Rat
    cost: Optional[Rat] = None
    slack: Optional[Rat] = None
    cap: Optional[Rat] = None


def edge_inconsistency(rho: HeuristicVector, v: str, c: str, w: Rat) -> Rat:
    gap = rho[v] - rho[c] - w
    return gap if gap > 0 else 0


def _path_terms(instance: PathInstance, rho: HeuristicVector):
    """Per-edge terms along the canonical optimal path, skipping the edge leaving the start."""
    opt = dijkstra_opt(instance)
    terms = []
    for v, c in zip(opt.path, opt.path[1:]):
        if v == instance.start:
            continue
        terms.append((v, c, edge_inconsistency(rho, v, c, instance.weight(v, c))))
    return opt, tuple(terms)


def inconsistency(instance: PathInstance, rho: HeuristicVector) -> InconsistencyReport:
    opt, terms = _path_terms(instance, rho)
    return InconsistencyReport(
        delta=sum((t for _, _, t in terms), 0),
        terms=terms,
        opt=opt.cost,
    )


def check_suboptimality_bound(
    instance: PathInstance, rho: HeuristicVector, reopening: bool
) -> InconsistencyReport:
    """Run A* and certify cost <= opt + delta; negative slack is a hard failure."""
    opt, terms = _path_terms(instance, rho)
    delta = sum((t for _, _, t in terms), 0)
    trace = run_astar(instance, rho, reopening=reopening, record=False)
    slack = opt.cost + delta - trace.cost
    if slack < 0:
        raise CertificateViolation(
            f"suboptimality certificate violated: cost={trace.cost} opt={opt.cost} delta={delta}"
        )
    return InconsistencyReport(delta=delta, terms=terms, opt=opt.cost, cost=trace.cost, slack=slack)


@dataclass(frozen=True)
class LedgerReport:
    """Per-iteration audit of the machinery behind the suboptimality bound."""

    algorithm: str
    iterations: int
    opt_path: tuple[str, ...]
    shallowest: tuple[int, ...]          # optimal-path index of the shallowest vertex at each tau
    gcost_checks: int                    # number of per-vertex g-error inequalities verified
    decomposition: tuple[Rat, Rat, Rat]  # (cost, opt, decomposition right-hand side)
    ok: bool


def verify_appendix_ledger(
    instance: PathInstance, rho: HeuristicVector, reopening: bool
) -> LedgerReport:
    """Instrument an A* run against the canonical optimal path v_0..v_k.

    Checks, exactly and at every iteration count tau from 0 to T (t is
    selected at iteration T+1):
      * a shallowest vertex exists: some v_i in OPEN but not yet selected,
        with every earlier optimal-path vertex already selected;
      * for every selected optimal-path vertex v_i, the g-cost error
        g(v_i) - g*(v_i) is within the inconsistency accumulated on the
        optimal path before v_i (excluding the first edge);
      * the final decomposition cost <= opt + g-error + rho inadmissibility
        holds at the shallowest vertex at T.
    """
    trace = run_astar(instance, rho, reopening=reopening, record=True)
    opt = dijkstra_opt(instance)
    path = opt.path
    pos = {v: i for i, v in enumerate(path)}
    g_star = distances_from_start(instance)
    rho_star = distances_to_goal(instance)

    # prefix_inc[i] = sum of Inc over optimal-path edges strictly before v_i,
    # skipping the edge that leaves the start.
    prefix_inc: list[Rat] = [0, 0]
    for i in range(1, len(path) - 1):
        v, c = path[i], path[i + 1]
        prefix_inc.append(prefix_inc[-1] + edge_inconsistency(rho, v, c, instance.weight(v, c)))

    T = trace.iterations - 1
    selected_set: set[str] = set()
    shallowest: list[int] = []
    gcost_checks = 0

    def state_at(tau: int):
        if tau == 0:
            return (instance.start,), {instance.start: 0}
        sn = trace.snapshots[tau - 1]
        return sn.open_set, dict(sn.g)

    for tau in range(T + 1):
        open_v, g_map = state_at(tau)
        if tau > 0:
            selected_set.add(trace.selected[tau - 1])
        open_set = set(open_v)

        first_unselected = 0
        while first_unselected < len(path) and path[first_unselected] in selected_set:
            first_unselected += 1
        if first_unselected >= len(path) or path[first_unselected] not in open_set:
            raise LedgerViolation(f"no shallowest vertex after iteration {tau}")
        shallowest.append(first_unselected)

        for v, i in pos.items():
            if v in selected_set:
                err = g_map[v] - g_star[v]
                if err < 0:
                    raise LedgerViolation(f"g below the exact distance at {v!r}, iteration {tau}")
                if err > prefix_inc[i]:
                    raise LedgerViolation(
                        f"g-cost error {err} at {v!r} exceeds accumulated inconsistency "
                        f"{prefix_inc[i]} after iteration {tau}"
                    )
                gcost_checks += 1

    # Decomposition at T: the score of the shallowest vertex caps the cost.
    i = shallowest[-1]
    v_i = path[i]
    _, g_map = state_at(T)
    dg = g_map[v_i] - g_star[v_i]
    rhs = opt.cost + dg + rho[v_i] - rho_star[v_i] - rho[instance.goal]
    if trace.cost > rhs:
        raise LedgerViolation(
            f"decomposition failed: cost={trace.cost} > opt + g-error + inadmissibility = {rhs}"
        )
    return LedgerReport(
        algorithm=trace.algorithm,
        iterations=trace.iterations,
        opt_path=path,
        shallowest=tuple(shallowest),
        gcost_checks=gcost_checks,
        decomposition=(trace.cost, opt.cost, rhs),
        ok=True,
    )


class InconsistencyEvaluator:
    """Caches canonical optimal paths so repeated evaluations only touch rho."""

    def __init__(self, instances: Sequence[PathInstance]):
        if not instances:
            raise ValidationError("need at least one instance")
        self.instances = tuple(instances)
        self._templates = []
        for x in self.instances:
            opt = dijkstra_opt(x)
            self._templates.append(
                tuple(
                    (v, c, x.weight(v, c))
                    for v, c in zip(opt.path, opt.path[1:])
                    if v != x.start
                )
            )

    def delta(self, rho: HeuristicVector, k: int) -> Rat:
        rv = rho.values
        total: Rat = 0
        for v, c, w in self._templates[k]:
            gap = rv[v] - rv[c] - w
            if gap > 0:
                total += gap
        return total

    def mean(self, rho: HeuristicVector) -> Rat:
        total = sum((self.delta(rho, k) for k in range(len(self.instances))), 0)
        return Fraction(total, len(self.instances))

    def subgradient(self, rho: HeuristicVector) -> dict[str, Fraction]:
        """One subgradient of the mean: active terms push +1/N at v and -1/N at c."""
        rv = rho.values
        counts: dict[str, int] = {}
        for template in self._templates:
            for v, c, w in template:
                if rv[v] - rv[c] - w > 0:
                    counts[v] = counts.get(v, 0) + 1
                    counts[c] = counts.get(c, 0) - 1
        n = len(self.instances)
        return {v: Fraction(k, n) for v, k in counts.items() if k != 0}


def empirical_inconsistency(instances: Sequence[PathInstance], rho: HeuristicVector) -> Rat:
    value = InconsistencyEvaluator(instances).mean(rho)
    return int(value) if value.denominator == 1 else value


def exact_distance_vector(instance: PathInstance) -> HeuristicVector:
    """Heuristic equal to the true remaining distance; consistent by construction.

    Vertices that cannot reach the goal get a common finite sentinel larger
    than any path cost, which keeps consistency intact on their edges.
    """
    dist = distances_to_goal(instance)
    sentinel = sum(instance.edges.values()) + 1
    return HeuristicVector({v: dist.get(v, sentinel) for v in instance.vertices})


INIT_MODES = ("zeros", "distances", "given")


@dataclass(frozen=True)
class LearnerConfig:
    eta: float = 1.0
    decay: float = 0.5
    max_steps: int = 1000
    init: str = "zeros"
    init_vector: Optional[HeuristicVector] = None
    seed: int = 0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValidationError("step size eta must be positive")
        if self.max_steps < 1:
            raise ValidationError("need at least one step")
        if self.init not in INIT_MODES:
            raise ValidationError(f"unknown init mode {self.init!r}")
        if self.init == "given" and self.init_vector is None:
            raise ValidationError("init mode 'given' requires init_vector")


@dataclass
class LearnerResult:
    rho: HeuristicVector
    best_objective: Rat
    history: list[Rat] = field(default_factory=list)
    steps: int = 0
    converged: bool = False


def minimize_empirical_inconsistency(
    instances: Sequence[PathInstance], config: LearnerConfig
) -> LearnerResult:
    """Subgradient descent on the mean inconsistency.

    The objective is convex piecewise-linear; terms sitting exactly at zero
    contribute nothing to the chosen subgradient. Step sizes follow
    eta / t**decay, embedded exactly as dyadic rationals so every iterate
    stays an exact rational vector. Returns the best iterate seen; a zero
    objective is the known global minimum, anything else is flagged as not
    converged.
    """
    ev = InconsistencyEvaluator(instances)
    vertices = instances[0].vertices
    if config.init == "zeros":
        rho = HeuristicVector({v: 0 for v in vertices})
    elif config.init == "distances":
        rho = exact_distance_vector(instances[0])
    else:
        rho = config.init_vector

    best_rho, best_f = rho, ev.mean(rho)
    history: list[Rat] = [best_f]
    steps = 0
    for t in range(1, config.max_steps + 1):
        grad = ev.subgradient(rho)
        if not grad:
            break  # zero subgradient of a convex objective: global minimum reached
        step = Fraction(config.eta / t ** config.decay)
        values = dict(rho.values)
        for v, gcomp in grad.items():
            values[v] = values[v] - step * gcomp
        rho = HeuristicVector(values)
        f = ev.mean(rho)
        history.append(f)
        steps = t
        if f < best_f:
            best_f, best_rho = f, rho
    return LearnerResult(
        rho=best_rho,
        best_objective=best_f,
        history=history,
        steps=steps,
        converged=(best_f == 0),
    )
