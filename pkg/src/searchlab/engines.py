"""Greedy best-first search, A* with optional reopening, and a canonical Dijkstra.

Both engines realize the same selection contract: pick the OPEN vertex with
the smallest score, breaking ties toward the smaller vertex in the instance's
total order. GBFS scores by the heuristic value alone and tests the goal when
a child is generated; A* scores by g + heuristic and tests the goal when a
vertex is selected. The asymmetry is deliberate and load-bearing.

All arithmetic is exact (int/Fraction), so equal scores are equal, not close.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from hashlib import sha256
from typing import Optional

from .errors import InfeasibleInstanceError, SearchLabError, ValidationError
from .instances import HeuristicVector, PathInstance
from .rational import Rat, format_rat

GBFS = "gbfs"
ASTAR_REOPEN = "astar-reopen"
ASTAR_NOREOPEN = "astar-noreopen"


@dataclass(frozen=True)
class Snapshot:
    """State at the end of one iteration: who was selected, and the lists after expansion."""

    selected: str
    open_set: tuple[str, ...]
    closed_set: tuple[str, ...]
    parent: tuple[tuple[str, Optional[str]], ...]
    g: Optional[tuple[tuple[str, Rat], ...]]


@dataclass(frozen=True)
class SearchTrace:
    algorithm: str
    instance_digest: str
    selected: tuple[str, ...]
    path: tuple[str, ...]
    cost: Rat
    iterations: int
    snapshots: Optional[tuple[Snapshot, ...]]  # None when recording was disabled


@dataclass(frozen=True)
class CanonicalOptimalPath:
    """Minimum-cost s-t path, lexicographically least under the vertex order."""

    path: tuple[str, ...]
    cost: Rat


def _check_inputs(instance: PathInstance, rho: HeuristicVector) -> None:
    missing = [v for v in instance.vertices if v not in rho]
    if missing:
        raise ValidationError(f"heuristic vector missing entries for {missing}")


def _path_cost(instance: PathInstance, path: tuple[str, ...]) -> Rat:
    return sum(instance.weight(u, v) for u, v in zip(path, path[1:]))


def _trace_parents(parent: dict, goal: str, n: int) -> tuple[str, ...]:
    path = [goal]
    v = goal
    while parent[v] is not None:
        v = parent[v]
        path.append(v)
        if len(path) > n:
            raise SearchLabError("parent pointers form a cycle")
    path.reverse()
    return tuple(path)


def _snapshot(order, selected, open_set, closed_set, parent, g):
    key = order.__getitem__
    return Snapshot(
        selected=selected,
        open_set=tuple(sorted(open_set, key=key)),
        closed_set=tuple(sorted(closed_set, key=key)),
        parent=tuple(sorted(parent.items(), key=lambda kv: order[kv[0]])),
        g=None if g is None else tuple(sorted(g.items(), key=lambda kv: order[kv[0]])),
    )


def run_gbfs(instance: PathInstance, rho: HeuristicVector, record: bool = True) -> SearchTrace:
    """Greedy best-first search; returns as soon as the goal is generated."""
    _check_inputs(instance, rho)
    s, t = instance.start, instance.goal
    if s == t:
        raise ValidationError("start equals goal; instance violates feasibility assumptions")
    order = instance._order
    rv = rho.values

    open_set = {s}
    closed_set: set[str] = set()
    parent: dict[str, Optional[str]] = {s: None}
    heap = [(rv[s], order[s], s)]
    selected: list[str] = []
    snapshots: list[Snapshot] = [] if record else None

    while heap:
        _, _, v = heapq.heappop(heap)
        selected.append(v)
        for c, _w in instance.children(v):
            if c == t:
                parent[t] = v
                path = _trace_parents(parent, t, instance.n)
                if record:
                    snapshots.append(_snapshot(order, v, open_set, closed_set, parent, None))
                return SearchTrace(
                    algorithm=GBFS,
                    instance_digest=instance.digest,
                    selected=tuple(selected),
                    path=path,
                    cost=_path_cost(instance, path),
                    iterations=len(selected),
                    snapshots=None if snapshots is None else tuple(snapshots),
                )
            if c not in open_set and c not in closed_set:
                parent[c] = v
                open_set.add(c)
                heapq.heappush(heap, (rv[c], order[c], c))
        open_set.remove(v)
        closed_set.add(v)
        if record:
            snapshots.append(_snapshot(order, v, open_set, closed_set, parent, None))
    raise InfeasibleInstanceError("OPEN exhausted before the goal was generated; instance is infeasible")


def run_astar(
    instance: PathInstance,
    rho: HeuristicVector,
    reopening: bool = True,
    record: bool = True,
) -> SearchTrace:
    """A* scored by g + heuristic; goal test at selection time.

    With ``reopening`` a closed child found via a strictly cheaper path moves
    back to OPEN; without it the cheaper path is ignored. Stale heap entries
    are skipped by comparing the popped score against the current g.
    """
    _check_inputs(instance, rho)
    s, t = instance.start, instance.goal
    if s == t:
        raise ValidationError("start equals goal; instance violates feasibility assumptions")
    order = instance._order
    rv = rho.values

    g: dict[str, Rat] = {s: 0}
    parent: dict[str, Optional[str]] = {s: None}
    open_set = {s}
    closed_set: set[str] = set()
    heap = [(rv[s], order[s], s)]
    selected: list[str] = []
    snapshots: list[Snapshot] = [] if record else None
    algorithm = ASTAR_REOPEN if reopening else ASTAR_NOREOPEN

    while heap:
        score, _, v = heapq.heappop(heap)
        if v not in open_set or score != g[v] + rv[v]:
            continue  # stale entry superseded by a cheaper rediscovery
        selected.append(v)
        if v == t:
            path = _trace_parents(parent, t, instance.n)
            if record:
                snapshots.append(_snapshot(order, v, open_set, closed_set, parent, g))
            return SearchTrace(
                algorithm=algorithm,
                instance_digest=instance.digest,
                selected=tuple(selected),
                path=path,
                cost=_path_cost(instance, path),
                iterations=len(selected),
                snapshots=None if snapshots is None else tuple(snapshots),
            )
        gv = g[v]
        for c, w in instance.children(v):
            g_new = gv + w
            if c not in open_set and c not in closed_set:
                g[c] = g_new
                parent[c] = v
                open_set.add(c)
                heapq.heappush(heap, (g_new + rv[c], order[c], c))
            elif c in open_set:
                if g_new < g[c]:
                    g[c] = g_new
                    parent[c] = v
                    heapq.heappush(heap, (g_new + rv[c], order[c], c))
            elif reopening and g_new < g[c]:
                g[c] = g_new
                parent[c] = v
                closed_set.remove(c)
                open_set.add(c)
                heapq.heappush(heap, (g_new + rv[c], order[c], c))
        open_set.remove(v)
        closed_set.add(v)
        if record:
            snapshots.append(_snapshot(order, v, open_set, closed_set, parent, g))
    raise InfeasibleInstanceError("OPEN exhausted before the goal was selected; instance is infeasible")


def dijkstra_opt(instance: PathInstance) -> CanonicalOptimalPath:
    """Exact optimum with canonical tie-breaking.

    Heap keys are (cost, path-as-order-indices); tuple comparison makes a
    strict prefix precede its extensions, so among equal-cost paths the
    lexicographically least vertex sequence wins. Appending an edge
    preserves key order and never decreases a key, which is exactly what
    Dijkstra's first-pop-wins argument needs; the closed set restricts the
    race to simple paths. Results are cached on the instance.
    """
    if instance._opt is not None:
        return instance._opt
    s, t = instance.start, instance.goal
    order = instance._order
    labels = instance.vertices
    heap = [(0, (order[s],))]
    closed: set[int] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        vi = path[-1]
        if vi in closed:
            continue
        closed.add(vi)
        v = labels[vi]
        if v == t:
            result = CanonicalOptimalPath(path=tuple(labels[i] for i in path), cost=cost)
            object.__setattr__(instance, "_opt", result)
            return result
        for c, w in instance.children(v):
            ci = order[c]
            if ci not in closed:
                heapq.heappush(heap, (cost + w, path + (ci,)))
    raise InfeasibleInstanceError(f"goal {t!r} unreachable from start {s!r}")


def _distances(instance: PathInstance, source: str, adjacency) -> dict[str, Rat]:
    order = instance._order
    dist: dict[str, Rat] = {}
    heap = [(0, order[source], source)]
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for c, w in adjacency[v]:
            if c not in dist:
                heapq.heappush(heap, (d + w, order[c], c))
    return dist


def distances_from_start(instance: PathInstance) -> dict[str, Rat]:
    """Exact shortest-path cost from the start to each reachable vertex."""
    return _distances(instance, instance.start, {v: instance.children(v) for v in instance.vertices})


def distances_to_goal(instance: PathInstance) -> dict[str, Rat]:
    """Exact shortest-path cost from each vertex to the goal (missing if it cannot reach)."""
    reverse: dict[str, list[tuple[str, Rat]]] = {v: [] for v in instance.vertices}
    for (u, v), w in instance.edges.items():
        reverse[v].append((u, w))
    return _distances(instance, instance.goal, reverse)


def _fingerprint_payload(trace: SearchTrace) -> dict:
    snaps = []
    for sn in trace.snapshots:
        entry = {
            "selected": sn.selected,
            "open": list(sn.open_set),
            "closed": list(sn.closed_set),
            "parent": {v: p for v, p in sn.parent},
        }
        if sn.g is not None:
            entry["g"] = {v: format_rat(q) for v, q in sn.g}
        snaps.append(entry)
    return {
        "selected": list(trace.selected),
        "snapshots": snaps,
        "path": list(trace.path),
        "cost": format_rat(trace.cost),
    }


def trace_fingerprint(trace: SearchTrace) -> str:
    """Digest equal iff the selection sequence, every snapshot, and the result agree."""
    if trace.snapshots is None:
        raise ValidationError("fingerprint requires a fully recorded trace")
    blob = json.dumps(_fingerprint_payload(trace), sort_keys=True, separators=(",", ":"))
    return sha256(blob.encode()).hexdigest()


def trace_to_json(trace: SearchTrace) -> list:
    """Wire format: one object per iteration, then a closing object with path and cost."""
    if trace.snapshots is None:
        raise ValidationError("trace export requires a fully recorded trace")
    out = []
    for k, sn in enumerate(trace.snapshots, start=1):
        entry = {
            "iter": k,
            "selected": sn.selected,
            "open": list(sn.open_set),
            "closed": list(sn.closed_set),
            "parent": {v: p for v, p in sn.parent},
        }
        if sn.g is not None:
            entry["g"] = {v: format_rat(q) for v, q in sn.g}
        out.append(entry)
    out.append({"path": list(trace.path), "cost": format_rat(trace.cost)})
    return out
