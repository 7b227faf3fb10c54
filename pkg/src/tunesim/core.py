"""Shared domain types: resource geometry, rung ladders, progressive cap state."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

ConfigId = int  # dense non-negative ids, assigned in draw order starting at 0


class TunesimError(Exception):
    """Base class for every error this package raises on purpose."""


class UsageError(TunesimError):
    """Bad invocation: unknown mode, malformed criterion spelling, bad flag value."""


class DataError(TunesimError):
    """Bad input data: benchmark files, infeasible generation, exhausted universes."""


class InternalError(TunesimError):
    """Broken engine invariant. Seeing this means a bug, not bad input."""


@dataclass(frozen=True)
class ResourceSpec:
    """Successive-halving resource geometry.

    min_resource is the rung-0 budget, reduction_factor the per-rung
    survival denominator (top 1/reduction_factor get promoted), and
    max_resource the hard cap that bounds progressive growth.
    """

    min_resource: int
    reduction_factor: int
    max_resource: int

    def __post_init__(self) -> None:
        if self.min_resource < 1:
            raise UsageError(f"min_resource must be >= 1, got {self.min_resource}")
        if self.reduction_factor < 2:
            raise UsageError(
                f"reduction_factor must be >= 2, got {self.reduction_factor}"
            )
        floor = self.reduction_factor**2 * self.min_resource
        if self.max_resource < floor:
            raise UsageError(
                f"max_resource must be >= reduction_factor^2 * min_resource "
                f"({floor}), got {self.max_resource}"
            )


def rung_resource(k: int, spec: ResourceSpec) -> int:
    """Resource amount of rung k: min_resource * reduction_factor ** k."""
    if k < 0:
        raise ValueError(f"rung index must be >= 0, got {k}")
    return spec.min_resource * spec.reduction_factor**k


def max_rung_index(spec: ResourceSpec) -> int:
    """Largest k whose rung resource still fits under max_resource.

    Computed by repeated integer multiplication, never by floating-point
    logarithms, so powers of the reduction factor are exact.
    """
    k = 0
    value = spec.min_resource
    while value * spec.reduction_factor <= spec.max_resource:
        value *= spec.reduction_factor
        k += 1
    return k


def rung_levels(spec: ResourceSpec) -> tuple[int, ...]:
    """Resource amount of every ladder level, bottom to top.

    Levels are the powers min_resource * reduction_factor ** k that fit
    under max_resource; when max_resource is not itself such a power it is
    appended as the final level, so the ladder always tops out exactly at
    the cap.
    """
    levels = [rung_resource(k, spec) for k in range(max_rung_index(spec) + 1)]
    if levels[-1] < spec.max_resource:
        levels.append(spec.max_resource)
    return tuple(levels)


@dataclass(frozen=True)
class PashaState:
    """Progressive growth state: step counter, current cap, current top rung."""

    t: int
    resource_cap: int
    top_rung: int


def initial_pasha_state(spec: ResourceSpec) -> PashaState:
    """Starting state: cap = reduction_factor^2 * min_resource, top rung 2."""
    return PashaState(t=0, resource_cap=spec.reduction_factor**2 * spec.min_resource, top_rung=2)


def grow(state: PashaState, spec: ResourceSpec) -> PashaState:
    """One growth step: multiply the cap by the reduction factor.

    A step that would overshoot max_resource clamps the cap to it and the
    top rung to the largest exact power index. Once the cap sits at
    max_resource further calls are no-ops; the scheduler then behaves like
    plain asynchronous successive halving.
    """
    if state.resource_cap >= spec.max_resource:
        return state
    next_cap = state.resource_cap * spec.reduction_factor
    if next_cap > spec.max_resource:
        return PashaState(state.t + 1, spec.max_resource, max_rung_index(spec))
    return PashaState(state.t + 1, next_cap, state.top_rung + 1)


@dataclass
class RungEntry:
    """One completed evaluation: config, observed metric, promotion mark."""

    config: ConfigId
    metric: float  # larger is better, minimization metrics are negated upstream
    promoted: bool = False
    completion_index: int = 0  # global tie-break counter, unique per scheduler


@dataclass
class RungLadder:
    """Rung table. Rung k holds entries evaluated at levels[k] resource units."""

    levels: tuple[int, ...]
    rungs: list[list[RungEntry]]

    @classmethod
    def empty(cls, levels: Sequence[int]) -> "RungLadder":
        levels = tuple(levels)
        if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"rung levels must be strictly increasing, got {levels}")
        return cls(levels, [[] for _ in levels])

    def insert(self, k: int, entry: RungEntry) -> None:
        if not 0 <= k < len(self.rungs):
            raise InternalError(
                f"rung index {k} outside ladder of {len(self.rungs)} levels"
            )
        if not math.isfinite(entry.metric):
            raise InternalError(
                f"non-finite metric for config {entry.config} at rung {k}"
            )
        if any(e.config == entry.config for e in self.rungs[k]):
            raise InternalError(
                f"duplicate result for config {entry.config} at rung {k}"
            )
        if k > 0 and not any(
            e.config == entry.config and e.promoted for e in self.rungs[k - 1]
        ):
            raise InternalError(
                f"config {entry.config} reached rung {k} without a promotion below"
            )
        self.rungs[k].append(entry)

    def sorted_rung(self, k: int) -> list[RungEntry]:
        """Entries of rung k, best metric first, earlier completion wins ties."""
        return sorted(self.rungs[k], key=lambda e: (-e.metric, e.completion_index))

    def highest_nonempty(self) -> int | None:
        for k in range(len(self.rungs) - 1, -1, -1):
            if self.rungs[k]:
                return k
        return None
