"""Path-finding instances, heuristic vectors, and seeded instance generators.

An instance is a simple weighted digraph with a start and a goal vertex.
The position of a vertex in the ``vertices`` list defines the total order
used for every tie-break downstream; it is part of the instance, not an
implementation detail.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from hashlib import sha256
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import GenerationError, ValidationError
from .rational import Rat, as_rat, format_rat

DISTRIBUTION_KINDS = ("erdos-renyi", "layered-dag", "grid", "lower-bound-family", "file-corpus")
WEIGHT_MODELS = ("unit", "integer", "rational", "powers-of-two")


class PathInstance:
    """Immutable weighted digraph with start/goal and a fixed vertex total order."""

    __slots__ = ("vertices", "edges", "start", "goal", "_order", "_children", "_digest", "_opt")

    def __init__(self, vertices: Sequence[str], edges, start: str, goal: str):
        vs = tuple(vertices)
        for v in vs:
            if not isinstance(v, str):
                raise ValidationError(f"vertex labels must be strings, got {v!r}")
        if len(set(vs)) != len(vs):
            raise ValidationError("duplicate vertex labels")
        order = {v: i for i, v in enumerate(vs)}

        normalized: dict[tuple[str, str], Rat] = {}
        items: Iterable
        if isinstance(edges, Mapping):
            items = ((u, v, w) for (u, v), w in edges.items())
        else:
            items = edges
        for u, v, w in items:
            if u not in order or v not in order:
                raise ValidationError(f"edge ({u!r}, {v!r}) references an unknown vertex")
            if (u, v) in normalized:
                raise ValidationError(f"duplicate edge ({u!r}, {v!r})")
            normalized[(u, v)] = as_rat(w)
        if start not in order:
            raise ValidationError(f"start vertex {start!r} is not in the vertex list")
        if goal not in order:
            raise ValidationError(f"goal vertex {goal!r} is not in the vertex list")

        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", normalized)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "goal", goal)
        object.__setattr__(self, "_order", order)

        children: dict[str, list[tuple[str, Rat]]] = {v: [] for v in vs}
        for (u, v), w in normalized.items():
            children[u].append((v, w))
        for v in vs:
            children[v].sort(key=lambda cw: order[cw[0]])
        object.__setattr__(self, "_children", {v: tuple(cs) for v, cs in children.items()})
        object.__setattr__(self, "_digest", None)
        object.__setattr__(self, "_opt", None)

    def __setattr__(self, name, value):
        raise AttributeError("PathInstance is immutable")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def vertex_order(self) -> tuple[str, ...]:
        """The total order used by every tie-break, as stored on disk."""
        return self.vertices

    def order_index(self, v: str) -> int:
        return self._order[v]

    def children(self, v: str) -> tuple[tuple[str, Rat], ...]:
        """Out-neighbors of v with weights, ascending in the vertex order."""
        return self._children[v]

    def weight(self, u: str, v: str) -> Rat:
        return self.edges[(u, v)]

    def edge_list(self) -> list[tuple[str, str, Rat]]:
        order = self._order
        return sorted(
            ((u, v, w) for (u, v), w in self.edges.items()),
            key=lambda e: (order[e[0]], order[e[1]]),
        )

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"u": u, "v": v, "w": format_rat(w)} for u, v, w in self.edge_list()],
            "start": self.start,
            "goal": self.goal,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PathInstance":
        try:
            raw_edges = data["edges"]
            vertices = data["vertices"]
            start = data["start"]
            goal = data["goal"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"instance JSON missing field: {exc}") from exc
        edges = []
        for e in raw_edges:
            try:
                edges.append((e["u"], e["v"], e["w"]))
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"bad edge record {e!r}") from exc
        return cls(vertices, edges, start, goal)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PathInstance":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"instance file is not valid JSON: {exc}") from exc
        return cls.from_json_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "PathInstance":
        return cls.loads(Path(path).read_text())

    @property
    def digest(self) -> str:
        if self._digest is None:
            blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
            object.__setattr__(self, "_digest", sha256(blob.encode()).hexdigest())
        return self._digest

    def __eq__(self, other):
        if not isinstance(other, PathInstance):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.start == other.start
            and self.goal == other.goal
        )

    def __hash__(self):
        return hash(self.digest)

    def __reduce__(self):
        # immutability blocks the default slot pickling; rebuild via the constructor
        return (PathInstance, (self.vertices, self.edge_list(), self.start, self.goal))

    def __repr__(self):
        return f"PathInstance(n={self.n}, edges={len(self.edges)}, start={self.start!r}, goal={self.goal!r})"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def validate(instance: PathInstance) -> ValidationReport:
    """Report-style invariant check; never raises.

    Duplicate edges cannot exist past construction, so they are not
    re-checked here.
    """
    violations = []
    if instance.n < 2:
        violations.append("instance must have at least 2 vertices")
    for (u, v), w in instance.edges.items():
        if u == v:
            violations.append(f"self-loop at {u!r}")
        if w < 0:
            violations.append(f"negative weight on edge ({u!r}, {v!r})")
    if instance.start == instance.goal:
        violations.append("start and goal must differ")
    elif not _reachable(instance, instance.start, instance.goal):
        violations.append(f"goal {instance.goal!r} unreachable from start {instance.start!r}")
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _reachable(instance: PathInstance, source: str, target: str) -> bool:
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == target:
            return True
        for v, _ in instance.children(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return False


class HeuristicVector:
    """Per-vertex heuristic values; entries are exact rationals, possibly negative."""

    __slots__ = ("values",)

    def __init__(self, values: Mapping[str, object]):
        object.__setattr__(self, "values", {str(v): as_rat(q) for v, q in values.items()})

    def __setattr__(self, name, value):
        raise AttributeError("HeuristicVector is immutable")

    def __getitem__(self, v: str) -> Rat:
        return self.values[v]

    def __contains__(self, v: str) -> bool:
        return v in self.values

    def __eq__(self, other):
        if not isinstance(other, HeuristicVector):
            return NotImplemented
        return self.values == other.values

    def __reduce__(self):
        return (HeuristicVector, (self.values,))

    def __repr__(self):
        inner = ", ".join(f"{v}: {format_rat(q)}" for v, q in self.values.items())
        return f"HeuristicVector({{{inner}}})"

    def covers(self, instance: PathInstance) -> bool:
        return all(v in self.values for v in instance.vertices)

    def shifted(self, c) -> "HeuristicVector":
        c = as_rat(c)
        return HeuristicVector({v: q + c for v, q in self.values.items()})

    def mapped(self, fn) -> "HeuristicVector":
        return HeuristicVector({v: fn(q) for v, q in self.values.items()})

    def to_json_dict(self) -> dict:
        return {"values": {v: format_rat(q) for v, q in sorted(self.values.items())}}

    @classmethod
    def from_json_dict(cls, data: dict) -> "HeuristicVector":
        try:
            return cls(data["values"])
        except (KeyError, TypeError) as exc:
            raise ValidationError("heuristic vector JSON must be {'values': {...}}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "HeuristicVector":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"heuristic vector file is not valid JSON: {exc}") from exc
        return cls.from_json_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "HeuristicVector":
        return cls.loads(Path(path).read_text())


@dataclass(frozen=True)
class InstanceDistributionSpec:
    """A concrete, seeded stand-in for the abstract instance distribution."""

    kind: str
    n: int
    weights: str = "unit"
    max_weight: int = 1
    seed: int = 0
    edge_prob: float = 0.35
    corpus_dir: Optional[str] = None
    max_attempts: int = 64

    def __post_init__(self):
        if self.kind not in DISTRIBUTION_KINDS:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        if self.weights not in WEIGHT_MODELS:
            raise ValidationError(f"unknown weight model {self.weights!r}")
        if self.kind != "file-corpus" and self.n < 2:
            raise ValidationError("instance size must be >= 2")
        if self.kind == "lower-bound-family" and self.n < 6:
            raise ValidationError("lower-bound family needs n >= 6")
        if self.max_weight < 0:
            raise ValidationError("max_weight must be non-negative")
        if not (0.0 < self.edge_prob <= 1.0):
            raise ValidationError("edge_prob must be in (0, 1]")
        if self.kind == "file-corpus" and not self.corpus_dir:
            raise ValidationError("file-corpus requires corpus_dir")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "weights": self.weights,
            "max_weight": self.max_weight,
            "seed": self.seed,
            "edge_prob": self.edge_prob,
            "corpus_dir": self.corpus_dir,
            "max_attempts": self.max_attempts,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "InstanceDistributionSpec":
        known = {f: data[f] for f in (
            "kind", "n", "weights", "max_weight", "seed", "edge_prob", "corpus_dir", "max_attempts",
        ) if f in data}
        try:
            return cls(**known)
        except TypeError as exc:
            raise ValidationError(f"bad distribution spec: {exc}") from exc


def sample_instance(spec: InstanceDistributionSpec, index: int) -> PathInstance:
    """Deterministic draw: a pure function of (spec, index)."""
    if index < 0:
        raise ValidationError("sample index must be non-negative")
    if spec.kind == "file-corpus":
        return _corpus_instance(spec, index)
    if spec.kind == "lower-bound-family":
        count = spec.n - 4
        return lower_bound_instance(spec.n, (index % count) + 1)
    for attempt in range(spec.max_attempts):
        rng = random.Random(f"{spec.seed}:{spec.kind}:{index}:{attempt}")
        if spec.kind == "erdos-renyi":
            instance = _gen_erdos_renyi(spec, rng)
        elif spec.kind == "layered-dag":
            instance = _gen_layered(spec, rng)
        else:
            instance = _gen_grid(spec, rng)
        if validate(instance).ok:
            return instance
    raise GenerationError(
        f"no feasible instance for {spec.kind} (n={spec.n}, seed={spec.seed}, index={index}) "
        f"after {spec.max_attempts} attempts"
    )


def _draw_weight(model: str, ell: int, rng: random.Random) -> Rat:
    if model == "unit":
        return 1
    if model == "integer":
        return rng.randint(0, ell)
    # rational in [0, ell] with a small random denominator
    den = rng.randint(1, 8)
    q = Fraction(rng.randint(0, ell * den), den)
    return int(q) if q.denominator == 1 else q


def _assign_weights(spec: InstanceDistributionSpec, pairs: list[tuple[str, str]], rng: random.Random):
    if spec.weights == "powers-of-two":
        return [(u, v, 1 << i) for i, (u, v) in enumerate(pairs)]
    return [(u, v, _draw_weight(spec.weights, spec.max_weight, rng)) for u, v in pairs]


def _gen_erdos_renyi(spec: InstanceDistributionSpec, rng: random.Random) -> PathInstance:
    vertices = ["s"] + [f"u{i}" for i in range(1, spec.n - 1)] + ["t"]
    pairs = [
        (u, v)
        for u in vertices
        for v in vertices
        if u != v and rng.random() < spec.edge_prob
    ]
    return PathInstance(vertices, _assign_weights(spec, pairs, rng), "s", "t")


def _gen_layered(spec: InstanceDistributionSpec, rng: random.Random) -> PathInstance:
    interior = spec.n - 2
    width = max(1, int(interior ** 0.5))
    layers: list[list[str]] = [["s"]]
    label = 0
    remaining = interior
    while remaining > 0:
        take = min(width, remaining)
        layers.append([f"u{label + j}" for j in range(take)])
        label += take
        remaining -= take
    layers.append(["t"])
    vertices = [v for layer in layers for v in layer]
    pairs = []
    for a, b in zip(layers, layers[1:]):
        for u in a:
            chosen = [v for v in b if rng.random() < spec.edge_prob]
            if not chosen:
                chosen = [rng.choice(b)]  # keep every layer forward-connected
            pairs.extend((u, v) for v in chosen)
    order = {v: i for i, v in enumerate(vertices)}
    pairs.sort(key=lambda e: (order[e[0]], order[e[1]]))
    return PathInstance(vertices, _assign_weights(spec, pairs, rng), "s", "t")


def _gen_grid(spec: InstanceDistributionSpec, rng: random.Random) -> PathInstance:
    rows = 1
    for r in range(1, int(spec.n ** 0.5) + 1):
        if spec.n % r == 0:
            rows = r
    cols = spec.n // rows
    name = lambda r, c: f"g{r}_{c}"
    vertices = [name(r, c) for r in range(rows) for c in range(cols)]
    pairs = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                pairs.append((name(r, c), name(r, c + 1)))
                if rng.random() < spec.edge_prob:
                    pairs.append((name(r, c + 1), name(r, c)))
            if r + 1 < rows:
                pairs.append((name(r, c), name(r + 1, c)))
                if rng.random() < spec.edge_prob:
                    pairs.append((name(r + 1, c), name(r, c)))
    order = {v: i for i, v in enumerate(vertices)}
    pairs.sort(key=lambda e: (order[e[0]], order[e[1]]))
    return PathInstance(vertices, _assign_weights(spec, pairs, rng), name(0, 0), name(rows - 1, cols - 1))


def _corpus_instance(spec: InstanceDistributionSpec, index: int) -> PathInstance:
    files = sorted(Path(spec.corpus_dir).glob("*.json"))
    if not files:
        raise GenerationError(f"no *.json instance files under {spec.corpus_dir!r}")
    return PathInstance.load(files[index % len(files)])


def lower_bound_instance(n: int, i: int) -> PathInstance:
    """Instance x_i of the unit-weight shatterable family on n vertices.

    Vertices are s, r, t, then the labeled vertices 1..n-3 (this listing is
    the total order). Edges: (s, v) for every labeled v; (v, t) for labeled
    v > i; plus the detour (i, r), (r, t). Every s-t path has cost 2 except
    the single detour path s->i->r->t of cost 3.
    """
    if n < 6:
        raise ValidationError("family requires n >= 6")
    if not (1 <= i <= n - 4):
        raise ValidationError(f"family index must be in [1, {n - 4}], got {i}")
    labeled = [str(j) for j in range(1, n - 2)]
    vertices = ["s", "r", "t"] + labeled
    edges = [("s", v, 1) for v in labeled]
    edges += [(v, "t", 1) for v in labeled if int(v) > i]
    edges += [(str(i), "r", 1), ("r", "t", 1)]
    return PathInstance(vertices, edges, "s", "t")


def power_of_two_instance(n: int) -> PathInstance:
    """Complete digraph whose edges, enumerated in vertex order, weigh 1, 2, 4, ...

    Binary representation makes every simple path cost from the start
    distinct, which maximizes the per-vertex g-cost catalogs.
    """
    if n < 2:
        raise ValidationError("need n >= 2")
    vertices = [f"v{i}" for i in range(1, n + 1)]
    pairs = [(u, v) for u in vertices for v in vertices if u != v]
    edges = [(u, v, 1 << i) for i, (u, v) in enumerate(pairs)]
    return PathInstance(vertices, edges, vertices[0], vertices[-1])
