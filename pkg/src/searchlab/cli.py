"""Single command-line entry point.

Exit codes separate failure kinds so CI can react: 0 success, 1 bad input,
2 a structural guarantee failed on real data (certificate/ledger/census),
64 usage errors. Every command that writes an output also writes a manifest
with the resolved configuration and input digests; re-running a manifest's
command reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from fractions import Fraction
from hashlib import sha256
from pathlib import Path

from . import __version__
from .complexity import (
    astar_behavior_census,
    build_lower_bound_family,
    gbfs_behavior_census,
    gcost_catalog,
    verify_shattering,
)
from .engines import dijkstra_opt, run_astar, run_gbfs, trace_to_json
from .errors import TheoryViolation, ValidationError
from .generalization import (
    GapExperimentConfig,
    report_bound_shape,
    run_gap_experiment,
    shape_report_csv,
)
from .inconsistency import (
    LearnerConfig,
    check_suboptimality_bound,
    inconsistency,
    minimize_empirical_inconsistency,
    verify_appendix_ledger,
)
from .instances import (
    HeuristicVector,
    InstanceDistributionSpec,
    PathInstance,
    validate,
)
from .rational import format_rat, parse_rat

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for theory violations
    def error(self, message):
        raise _UsageError(message)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rat(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, set):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    return obj


def _payload_csv(payload: dict) -> str:
    lines = ["key,value"]
    flat = _jsonable(payload)

    def walk(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(value, list):
            lines.append(f"{prefix},{json.dumps(value)}")
        else:
            lines.append(f"{prefix},{value}")

    walk("", flat)
    return "\n".join(lines) + "\n"


def _file_digest(path: Path) -> str:
    return sha256(path.read_bytes()).hexdigest()


def _corpus_files(directory: str) -> list[Path]:
    files = sorted(Path(directory).glob("*.json"))
    if not files:
        raise ValidationError(f"no *.json instance files under {directory!r}")
    return files


def _load_corpus(directory: str) -> list[PathInstance]:
    return [PathInstance.load(p) for p in _corpus_files(directory)]


def _write_manifest(args, inputs: dict[str, str], outputs: list[str], manifest_path: Path) -> None:
    config = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func" and not callable(v)
    }
    manifest = {
        "subcommand": args.subcommand,
        "config": _jsonable(config),
        "seed": getattr(args, "seed", None),
        "versions": {"searchlab": __version__, "python": sys.version.split()[0]},
        "inputs": inputs,
        "outputs": outputs,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _emit(args, payload: dict, inputs: dict[str, str], text: str | None = None) -> None:
    """Write the primary output (JSON unless a preformatted text is given) plus a manifest."""
    if text is None:
        text = (
            _payload_csv(payload)
            if args.format == "csv"
            else json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
        )
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        _write_manifest(args, inputs, [str(out)], out.with_name(out.name + ".manifest.json"))
    else:
        sys.stdout.write(text)


def _instance_arg(args) -> PathInstance:
    return PathInstance.load(args.instance)


def _rho_arg(args) -> HeuristicVector:
    return HeuristicVector.load(args.rho)


def _common_inputs(args) -> dict[str, str]:
    inputs = {}
    for attr in ("instance", "rho", "config", "corpus"):
        value = getattr(args, attr, None)
        if value is None:
            continue
        p = Path(value)
        if p.is_dir():
            inner = {str(f): _file_digest(f) for f in sorted(p.glob("*.json"))}
            inputs[str(p)] = sha256(json.dumps(inner, sort_keys=True).encode()).hexdigest()
        elif p.exists():
            inputs[str(p)] = _file_digest(p)
    return inputs


def _cmd_validate(args) -> int:
    report = validate(_instance_arg(args))
    _emit(args, {"ok": report.ok, "violations": list(report.violations)}, _common_inputs(args))
    return EXIT_OK if report.ok else EXIT_INPUT


def _run_trace(args, instance, rho):
    if args.algo == "gbfs":
        return run_gbfs(instance, rho)
    return run_astar(instance, rho, reopening=args.reopen)


def _cmd_run(args) -> int:
    instance = _instance_arg(args)
    report = validate(instance)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    trace = _run_trace(args, instance, _rho_arg(args))
    if args.emit_trace:
        Path(args.emit_trace).write_text(json.dumps(trace_to_json(trace), indent=2) + "\n")
    payload = {
        "algorithm": trace.algorithm,
        "path": list(trace.path),
        "cost": trace.cost,
        "iterations": trace.iterations,
        "selected": list(trace.selected),
    }
    _emit(args, payload, _common_inputs(args))
    return EXIT_OK


def _cmd_opt(args) -> int:
    opt = dijkstra_opt(_instance_arg(args))
    _emit(args, {"path": list(opt.path), "cost": opt.cost}, _common_inputs(args))
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .measures import UtilityMeasure, evaluate

    instance = _instance_arg(args)
    trace = _run_trace(args, instance, _rho_arg(args))
    measure = UtilityMeasure(kind=args.measure, cap=parse_rat(args.cap))
    value = evaluate(measure, instance, trace)
    _emit(args, {"measure": measure.kind, "cap": measure.cap, "value": value.value, "clipped": value.clipped}, _common_inputs(args))
    return EXIT_OK


def _cmd_inconsistency(args) -> int:
    report = inconsistency(_instance_arg(args), _rho_arg(args))
    _emit(args, _report_payload(report), _common_inputs(args))
    return EXIT_OK


def _report_payload(report) -> dict:
    return {
        "delta": report.delta,
        "terms": [{"v": v, "c": c, "inc": t} for v, c, t in report.terms],
        "opt": report.opt,
        "cost": report.cost,
        "slack": report.slack,
    }


def _cmd_check_bound(args) -> int:
    report = check_suboptimality_bound(_instance_arg(args), _rho_arg(args), reopening=args.reopen)
    _emit(args, _report_payload(report), _common_inputs(args))
    return EXIT_OK


def _cmd_ledger(args) -> int:
    report = verify_appendix_ledger(_instance_arg(args), _rho_arg(args), reopening=args.reopen)
    payload = {
        "algorithm": report.algorithm,
        "iterations": report.iterations,
        "opt_path": list(report.opt_path),
        "shallowest": list(report.shallowest),
        "gcost_checks": report.gcost_checks,
        "decomposition": {
            "cost": report.decomposition[0],
            "opt": report.decomposition[1],
            "bound": report.decomposition[2],
        },
        "ok": report.ok,
    }
    _emit(args, payload, _common_inputs(args))
    return EXIT_OK


def _cmd_learn(args) -> int:
    corpus = _load_corpus(args.corpus)
    init_vector = HeuristicVector.load(args.init_rho) if args.init_rho else None
    config = LearnerConfig(
        eta=args.eta,
        decay=args.decay,
        max_steps=args.steps,
        init=args.init,
        init_vector=init_vector,
        seed=args.seed or 0,
    )
    result = minimize_empirical_inconsistency(corpus, config)
    summary = {
        "best_objective": result.best_objective,
        "initial_objective": result.history[0],
        "steps": result.steps,
        "converged": result.converged,
        "corpus_size": len(corpus),
    }
    rho_text = result.rho.dumps()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(rho_text)
        _write_manifest(args, _common_inputs(args), [str(out)], out.with_name(out.name + ".manifest.json"))
        sys.stdout.write(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(rho_text)
    return EXIT_OK


def _cmd_lower_bound(args) -> int:
    family = build_lower_bound_family(args.n)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for i, x in enumerate(family, start=1):
            path = out / f"x_{i}.json"
            path.write_text(x.dumps())
            written.append(str(path))
        _write_manifest(args, {}, written, out / "manifest.json")
        sys.stdout.write(json.dumps({"written": written}, indent=2) + "\n")
    else:
        sys.stdout.write(json.dumps([x.to_json_dict() for x in family], indent=2) + "\n")
    return EXIT_OK


def _cmd_shatter(args) -> int:
    result = verify_shattering(
        args.n,
        args.algo,
        exhaustive=args.exhaustive,
        samples=args.samples,
        seed=args.seed or 0,
        jobs=args.jobs,
    )
    missing = result.missing if result.exhaustive else []
    payload = {
        "n": result.n,
        "algorithm": result.algorithm,
        "instances": result.count,
        "thresholds": list(result.thresholds),
        "achieved_patterns": len(result.achieved),
        "total_patterns": 1 << result.count,
        "checked_subsets": result.checked_subsets,
        "exhaustive": result.exhaustive,
        "shattered": result.shattered,
        "missing_count": len(missing),
        "missing_sample": missing[:32],
    }
    _emit(args, payload, _common_inputs(args))
    return EXIT_OK


def _cmd_census(args) -> int:
    corpus = _load_corpus(args.corpus)
    if args.algo == "gbfs":
        report = gbfs_behavior_census(corpus)
    else:
        report = astar_behavior_census(
            corpus, grid_side=args.grid_side, samples=args.samples or 200, seed=args.seed or 0
        )
    payload = {
        "algorithm": report.algorithm,
        "instances": report.instance_count,
        "sampled": report.sampled,
        "distinct_behaviors": report.distinct,
        "bound": report.bound,
        "bound_note": report.bound_note,
        "hyperplanes": report.hyperplanes,
        "within_bound": report.within_bound,
    }
    _emit(args, payload, _common_inputs(args))
    return EXIT_OK


def _cmd_gcosts(args) -> int:
    catalog = gcost_catalog(_instance_arg(args))
    payload = {
        "costs": {v: list(costs) for v, costs in catalog.costs.items()},
        "catalog_sizes": {v: len(costs) for v, costs in catalog.costs.items()},
        "path_counts": catalog.path_counts,
        "total_size": catalog.total_size,
        "max_out_degree": catalog.max_out_degree,
        "integer_weights": catalog.integer_weights,
        "max_weight": catalog.max_weight,
        "factorial_sum_claim": catalog.factorial_sum_claim,
        "formula_matches_counts": catalog.formula_matches_counts,
    }
    _emit(args, payload, _common_inputs(args))
    return EXIT_OK


def _gap_config(args) -> GapExperimentConfig:
    data = json.loads(Path(args.config).read_text())
    try:
        dist = InstanceDistributionSpec.from_json_dict(data["distribution"])
        learner_data = data.get("learner", {})
        learner = LearnerConfig(
            eta=learner_data.get("eta", 1.0),
            decay=learner_data.get("decay", 0.5),
            max_steps=learner_data.get("max_steps", 200),
            init=learner_data.get("init", "zeros"),
            seed=learner_data.get("seed", 0),
        )
        config = GapExperimentConfig(
            distribution=dist,
            sizes=tuple(data["sizes"]),
            trials=data["trials"],
            mode=data.get("mode", "learner"),
            measure=data.get("measure", "subopt"),
            cap=parse_rat(str(data.get("cap", "64"))),
            heldout_size=data.get("heldout_size", 2048),
            confidence=data.get("confidence", 0.1),
            seed=data.get("seed", 0),
            reopening=data.get("reopening", False),
            learner=learner,
            grid_candidates=data.get("grid_candidates", 32),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad gap config: {exc}") from exc
    if args.seed is not None:
        config = dataclasses.replace(
            config,
            seed=args.seed,
            distribution=dataclasses.replace(dist, seed=args.seed),
        )
    return config


def _cmd_gap(args) -> int:
    config = _gap_config(args)
    curve = run_gap_experiment(config, jobs=args.jobs)
    csv_text = curve.to_csv()
    outputs = []
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(csv_text)
        outputs.append(str(out))
    else:
        sys.stdout.write(csv_text)
    if args.shape_out:
        n = config.distribution.n
        shape = shape_report_csv(report_bound_shape(curve, n))
        Path(args.shape_out).write_text(shape)
        outputs.append(args.shape_out)
    if args.out:
        out = Path(args.out)
        _write_manifest(args, _common_inputs(args), outputs, out.with_name(out.name + ".manifest.json"))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="searchlab", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="override configured seeds")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers; never affects outputs")
    parser.add_argument("--out", default=None, help="write the primary output here (manifest alongside)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def cmd(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    p = cmd("validate", _cmd_validate, help="check instance invariants")
    p.add_argument("--instance", required=True)

    p = cmd("run", _cmd_run, help="run a search engine")
    p.add_argument("--algo", choices=("gbfs", "astar"), required=True)
    p.add_argument("--reopen", type=_parse_bool, default=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--emit-trace", default=None)

    p = cmd("opt", _cmd_opt, help="exact optimum with canonical tie-breaking")
    p.add_argument("--instance", required=True)

    p = cmd("eval", _cmd_eval, help="evaluate a bounded utility measure")
    p.add_argument("--measure", choices=("path-cost", "subopt", "expansions"), required=True)
    p.add_argument("--cap", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--algo", choices=("gbfs", "astar"), default="astar")
    p.add_argument("--reopen", type=_parse_bool, default=True)

    p = cmd("inconsistency", _cmd_inconsistency, help="inconsistency along the canonical optimal path")
    p.add_argument("--instance", required=True)
    p.add_argument("--rho", required=True)

    p = cmd("check-bound", _cmd_check_bound, help="certify cost <= opt + inconsistency on a real run")
    p.add_argument("--instance", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--reopen", type=_parse_bool, required=True)

    p = cmd("ledger", _cmd_ledger, help="audit the per-iteration bookkeeping behind the bound")
    p.add_argument("--instance", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--reopen", type=_parse_bool, required=True)

    p = cmd("learn", _cmd_learn, help="minimize empirical inconsistency over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--decay", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--init", choices=("zeros", "distances", "given"), default="zeros")
    p.add_argument("--init-rho", default=None)

    p = cmd("lower-bound", _cmd_lower_bound, help="emit the shatterable instance family")
    p.add_argument("--n", type=int, required=True)

    p = cmd("shatter", _cmd_shatter, help="verify threshold sign patterns on the family")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--algo", choices=("gbfs", "astar"), required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=None)

    p = cmd("census", _cmd_census, help="count distinct behaviors against the proven bounds")
    p.add_argument("--algo", choices=("gbfs", "astar"), required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--permutations", action="store_true", help="gbfs: enumerate all orders (default)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--grid-side", type=int, default=4)

    p = cmd("gcosts", _cmd_gcosts, help="per-vertex catalog of simple-path costs from the start")
    p.add_argument("--instance", required=True)

    p = cmd("gap", _cmd_gap, help="train/held-out gap experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--shape-out", default=None)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except TheoryViolation as exc:
        sys.stderr.write(f"theory violation: {exc}\n")
        return EXIT_VIOLATION
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
