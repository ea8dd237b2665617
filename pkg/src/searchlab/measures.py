"""Bounded utility measures over search executions.

Every measure maps (instance, trace) into [0, H]; values above the cap are
clipped and flagged rather than rejected, so sweeps stay total.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engines import SearchTrace, dijkstra_opt
from .errors import CertificateViolation, ValidationError
from .instances import PathInstance
from .rational import Rat, as_rat

MEASURE_KINDS = ("path-cost", "subopt", "expansions")
_ALIASES = {"suboptimality": "subopt"}


@dataclass(frozen=True)
class UtilityMeasure:
    kind: str
    cap: Rat

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "cap", as_rat(self.cap))
        if kind not in MEASURE_KINDS:
            raise ValidationError(f"unknown measure kind {self.kind!r}")
        if self.cap <= 0:
            raise ValidationError("measure cap must be positive")


@dataclass(frozen=True)
class UtilityValue:
    value: Rat
    clipped: bool


def suboptimality_cap(n: int, max_weight) -> Rat:
    """Default cap for suboptimality on corpora with weights in [0, max_weight]."""
    return as_rat(max_weight) * (n - 1)


def evaluate(measure: UtilityMeasure, instance: PathInstance, trace: SearchTrace) -> UtilityValue:
    if trace.instance_digest != instance.digest:
        raise ValidationError("trace was produced on a different instance")
    if measure.kind == "path-cost":
        raw = trace.cost
    elif measure.kind == "expansions":
        raw = trace.iterations
    else:
        raw = trace.cost - dijkstra_opt(instance).cost
        if raw < 0:
            raise CertificateViolation(
                f"returned cost {trace.cost} below the exact optimum; engine or oracle is broken"
            )
    if raw > measure.cap:
        return UtilityValue(value=measure.cap, clipped=True)
    return UtilityValue(value=raw, clipped=False)
