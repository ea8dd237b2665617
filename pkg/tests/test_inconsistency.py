import itertools
import random
from fractions import Fraction

import pytest

from searchlab.engines import dijkstra_opt, distances_to_goal, run_astar
from searchlab.errors import ValidationError
from searchlab.inconsistency import (
    InconsistencyEvaluator,
    LearnerConfig,
    check_suboptimality_bound,
    empirical_inconsistency,
    exact_distance_vector,
    inconsistency,
    minimize_empirical_inconsistency,
    verify_appendix_ledger,
)
from searchlab.instances import HeuristicVector, InstanceDistributionSpec, sample_instance

from oracles import random_rho, random_small_instance

CHAIN_RHO = {"s": 7, "a": 3, "b": 1, "t": 0}


def test_consistent_rho_has_zero_inconsistency():
    rng = random.Random(2)
    for _ in range(15):
        x = random_small_instance(rng)
        assert inconsistency(x, exact_distance_vector(x)).delta == 0


def test_chain_terms_evaluated_by_hand(chain):
    report = inconsistency(chain, HeuristicVector(CHAIN_RHO))
    assert report.terms == (("a", "b", 1), ("b", "t", 0))
    assert report.delta == 1
    assert report.opt == 3


def test_family_x2_delta(fig_family, fig_rho):
    report = inconsistency(fig_family[1], fig_rho)
    assert report.terms == (("3", "t", 4),)
    assert report.delta == 4


def test_shift_invariance():
    rng = random.Random(13)
    for _ in range(25):
        x = random_small_instance(rng)
        rho = random_rho(rng, x)
        shift = Fraction(rng.randint(-50, 50), rng.randint(1, 7))
        assert inconsistency(x, rho).delta == inconsistency(x, rho.shifted(shift)).delta


def test_bound_consistent_rho_is_tight():
    rng = random.Random(29)
    for _ in range(10):
        x = random_small_instance(rng)
        report = check_suboptimality_bound(x, exact_distance_vector(x), reopening=False)
        assert report.cost == report.opt
        assert report.delta == 0
        assert report.slack == 0


def test_bound_on_family_detour(fig_family, fig_rho):
    report = check_suboptimality_bound(fig_family[1], fig_rho, reopening=False)
    assert (report.cost, report.opt, report.delta, report.slack) == (3, 2, 4, 3)


def test_bound_tight_on_reopening_fixture(reopening_fixture):
    x, rho = reopening_fixture
    no = check_suboptimality_bound(x, rho, reopening=False)
    assert (no.cost, no.opt, no.delta, no.slack) == (4, 3, 1, 0)
    re = check_suboptimality_bound(x, rho, reopening=True)
    assert (re.cost, re.slack) == (3, 1)


def test_bound_random_sweep_both_modes():
    rng = random.Random(37)
    for _ in range(150):
        x = random_small_instance(rng)
        rho = random_rho(rng, x)
        for reopening in (False, True):
            assert check_suboptimality_bound(x, rho, reopening=reopening).slack >= 0


def test_ledger_consistent_rho_all_zero():
    rng = random.Random(41)
    for _ in range(10):
        x = random_small_instance(rng)
        report = verify_appendix_ledger(x, exact_distance_vector(x), reopening=False)
        assert report.ok
        cost, opt, bound = report.decomposition
        assert cost == opt == bound


def test_ledger_on_family_and_fixture(fig_family, fig_rho, reopening_fixture):
    report = verify_appendix_ledger(fig_family[1], fig_rho, reopening=False)
    assert report.ok
    assert len(report.shallowest) == report.iterations  # every tau in 0..T audited
    x, rho = reopening_fixture
    for reopening in (False, True):
        assert verify_appendix_ledger(x, rho, reopening=reopening).ok


def test_ledger_random_sweep():
    rng = random.Random(43)
    for _ in range(120):
        x = random_small_instance(rng)
        rho = random_rho(rng, x)
        assert verify_appendix_ledger(x, rho, reopening=rng.random() < 0.5).ok


def test_empirical_mean(chain):
    rho = HeuristicVector(CHAIN_RHO)
    assert empirical_inconsistency([chain, chain], rho) == 1
    rng = random.Random(47)
    instances = [random_small_instance(rng) for _ in range(6)]
    rho_all = random_rho(rng, instances[0])
    # recomputation oracle: mean of the per-instance reports
    per = [inconsistency(x, HeuristicVector({v: rho_all.values.get(v, 0) for v in x.vertices})).delta
           for x in instances]
    rhos = HeuristicVector({v: rho_all.values.get(v, 0) for v in instances[0].vertices})
    assert empirical_inconsistency(instances, rhos) == Fraction(sum(per), len(per))


def test_convexity_exact():
    rng = random.Random(53)
    spec = InstanceDistributionSpec(kind="erdos-renyi", n=7, weights="integer", max_weight=4, seed=5)
    instances = [sample_instance(spec, i) for i in range(4)]
    ev = InconsistencyEvaluator(instances)
    for _ in range(200):
        rho1 = random_rho(rng, instances[0])
        rho2 = random_rho(rng, instances[0])
        lam = Fraction(rng.randint(0, 12), 12)
        mix = HeuristicVector(
            {v: lam * rho1[v] + (1 - lam) * rho2[v] for v in instances[0].vertices}
        )
        assert ev.mean(mix) <= lam * ev.mean(rho1) + (1 - lam) * ev.mean(rho2)


def test_estimated_weight_heuristics_bound_by_weight_error():
    rng = random.Random(59)
    ell = 5
    spec = InstanceDistributionSpec(kind="erdos-renyi", n=8, weights="integer", max_weight=ell, seed=11)
    for index in range(15):
        x = sample_instance(spec, index)
        perturbed = {
            (u, v): max(0, min(ell, w + rng.randint(-2, 2)))
            for (u, v), w in x.edges.items()
        }
        estimated = x.__class__(
            x.vertices, [(u, v, w) for (u, v), w in perturbed.items()], x.start, x.goal
        )
        dist = distances_to_goal(estimated)
        sentinel = sum(estimated.edges.values()) + 1
        rho = HeuristicVector({v: dist.get(v, sentinel) for v in x.vertices})
        report = inconsistency(x, rho)
        for v, c, term in report.terms:
            assert term <= abs(perturbed[(v, c)] - x.weight(v, c))
        assert report.delta <= ell * (x.n - 2)


def test_learner_noop_at_global_minimum(chain):
    config = LearnerConfig(init="distances", max_steps=50)
    result = minimize_empirical_inconsistency([chain], config)
    assert result.best_objective == 0
    assert result.converged
    assert result.history[0] == 0
    assert result.rho == exact_distance_vector(chain)


def test_learner_descends_on_chain(chain):
    init = HeuristicVector({"s": 7, "a": 3, "b": 1, "t": 0})
    config = LearnerConfig(eta=0.25, max_steps=2000, init="given", init_vector=init)
    result = minimize_empirical_inconsistency([chain], config)
    assert result.history[0] == 1
    assert result.best_objective < Fraction(1, 100)
    running_min = result.history[0]
    for f in result.history:
        running_min = min(running_min, f)
    assert running_min == result.best_objective


def test_learner_matches_lattice_oracle():
    rng = random.Random(61)
    for corpus_seed in (1, 2, 3):
        spec = InstanceDistributionSpec(
            kind="erdos-renyi", n=5, weights="integer", max_weight=3, seed=corpus_seed
        )
        instances = [sample_instance(spec, i) for i in range(3)]
        ev = InconsistencyEvaluator(instances)
        vertices = instances[0].vertices
        # coarse lattice over a box around the origin
        lattice_best = None
        grid = range(-2, 3)
        for point in itertools.product(grid, repeat=len(vertices)):
            rho = HeuristicVector(dict(zip(vertices, point)))
            value = ev.mean(rho)
            lattice_best = value if lattice_best is None else min(lattice_best, value)
        init = random_rho(rng, instances[0], integer=True)
        config = LearnerConfig(eta=1.0, max_steps=800, init="given", init_vector=init)
        result = minimize_empirical_inconsistency(instances, config)
        assert result.best_objective <= lattice_best + Fraction(1, 20)


def test_learner_flags_nonconvergence(chain):
    init = HeuristicVector({"s": 0, "a": 1000, "b": 0, "t": 0})
    config = LearnerConfig(eta=0.001, max_steps=3, init="given", init_vector=init)
    result = minimize_empirical_inconsistency([chain], config)
    assert not result.converged
    assert result.best_objective > 0


def test_learner_config_validation(chain):
    with pytest.raises(ValidationError):
        LearnerConfig(eta=0)
    with pytest.raises(ValidationError):
        LearnerConfig(max_steps=0)
    with pytest.raises(ValidationError):
        LearnerConfig(init="given")
    with pytest.raises(ValidationError):
        minimize_empirical_inconsistency([], LearnerConfig())
