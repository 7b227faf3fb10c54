"""Promotion scheduling: asynchronous successive halving, its progressive-cap
variant, and the non-adaptive baselines, behind one get_job/report interface.

The scheduler is a sequential state machine. Callers (normally the simulator)
must serialize get_job and report; given one seed and one total order of
report calls the issued job sequence is deterministic.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .core import (
    ConfigId,
    DataError,
    InternalError,
    PashaState,
    ResourceSpec,
    RungEntry,
    RungLadder,
    UsageError,
    grow,
    initial_pasha_state,
    rung_levels,
)
from .ranking import RankedList, RankingCriterion, is_stable

MODES = ("pasha", "asha", "one-epoch", "no-increase", "random")

DEFAULT_CRITERION = RankingCriterion("soft", epsilon=0.025)


@dataclass(frozen=True)
class SchedulerConfig:
    """Everything one scheduling run needs besides the benchmark itself."""

    resources: ResourceSpec
    num_configs: int
    mode: str = "pasha"
    criterion: RankingCriterion | None = None  # progressive mode only
    seed: int = 0
    pair_below_cap: bool = False  # compare rungs (K-1, K-2) instead of (K, K-1)
    random_draws: int | None = None  # candidate pool size for the random baseline

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise UsageError(
                f"unknown mode {self.mode!r}; expected one of " + ", ".join(MODES)
            )
        if self.num_configs < 1:
            raise UsageError(f"num_configs must be >= 1, got {self.num_configs}")
        if self.random_draws is not None and self.random_draws < 1:
            raise UsageError(f"random_draws must be >= 1, got {self.random_draws}")


@dataclass(frozen=True)
class Job:
    """One unit of work: train config up to target_resource, report the metric."""

    config: ConfigId
    rung: int
    target_resource: int


class RandomSearcher:
    """Uniform draws without replacement from a fixed config universe.

    Any object with a draw() -> ConfigId method can stand in for it when a
    different search strategy is wanted.
    """

    def __init__(self, universe: Sequence[ConfigId], seed: int):
        self._ids = sorted(universe)
        random.Random(seed).shuffle(self._ids)
        self._next = 0

    def draw(self) -> ConfigId:
        if self._next >= len(self._ids):
            raise DataError(
                f"config universe exhausted after {len(self._ids)} draws"
            )
        config = self._ids[self._next]
        self._next += 1
        return config


class Scheduler:
    """Decision engine behind get_job and report."""

    def __init__(self, config: SchedulerConfig, universe: Sequence[ConfigId], searcher=None):
        if config.mode == "random":
            raise UsageError(
                "the random baseline draws once and runs no jobs; "
                "use run_baseline or simulate instead of a Scheduler"
            )
        self.config = config
        self.spec = config.resources
        self.levels = rung_levels(self.spec)
        self.ladder = RungLadder.empty(self.levels)
        self.searcher = searcher if searcher is not None else RandomSearcher(universe, config.seed)
        self.criterion = config.criterion or DEFAULT_CRITERION
        self.pasha: PashaState | None = (
            initial_pasha_state(self.spec) if config.mode in ("pasha", "no-increase") else None
        )
        self.drawn = 0
        self._completions = 0
        self._in_flight: set[tuple[ConfigId, int]] = set()

    @property
    def top_index(self) -> int:
        """Highest ladder index jobs may currently target."""
        if self.config.mode == "asha":
            return len(self.levels) - 1
        if self.config.mode == "one-epoch":
            return 0
        assert self.pasha is not None
        # highest level not above the current cap
        return bisect_right(self.levels, self.pasha.resource_cap) - 1

    def _find_promotion(self) -> tuple[int, RungEntry] | None:
        """Highest rung holding an unpromoted top-fraction entry, if any."""
        eta = self.spec.reduction_factor
        for k in range(self.top_index - 1, -1, -1):
            rung = self.ladder.rungs[k]
            quota = len(rung) // eta
            if quota == 0:
                continue
            for entry in self.ladder.sorted_rung(k)[:quota]:
                if not entry.promoted:
                    return k, entry
        return None

    def get_job(self) -> Job | None:
        """Next job: an eager promotion if one exists, else a fresh draw.

        Returns None when all configs are drawn and nothing is promotable
        right now; the worker should idle until the next completion.
        """
        found = self._find_promotion()
        if found is not None:
            k, entry = found
            entry.promoted = True
            job = Job(entry.config, k + 1, self.levels[k + 1])
            self._in_flight.add((job.config, job.rung))
            return job
        if self.drawn < self.config.num_configs:
            config = self.searcher.draw()
            self.drawn += 1
            job = Job(config, 0, self.levels[0])
            self._in_flight.add((job.config, job.rung))
            return job
        return None

    def report(self, job: Job, metric: float) -> None:
        """Record a completed job; in progressive mode, maybe raise the cap.

        The stability pair is the current top ladder level and the one
        beneath it, re-evaluated whenever a report lands in either (with
        pair_below_cap, the pair one level down, re-evaluated on reports
        into its upper rung). At most one growth step per report.
        """
        key = (job.config, job.rung)
        if key not in self._in_flight:
            raise InternalError(
                f"report for a job that is not in flight: config {job.config} "
                f"rung {job.rung}"
            )
        self._in_flight.discard(key)
        entry = RungEntry(
            job.config, metric, promoted=False, completion_index=self._completions
        )
        self._completions += 1
        self.ladder.insert(job.rung, entry)
        if self.config.mode != "pasha":
            return
        assert self.pasha is not None
        if self.pasha.resource_cap >= self.spec.max_resource:
            return  # clamped: behave like plain successive halving
        top = self.top_index
        if self.config.pair_below_cap:
            pair_top, triggers = top - 1, (top - 1,)
        else:
            pair_top, triggers = top, (top, top - 1)
        if job.rung not in triggers:
            return
        top_ranked = RankedList.from_entries(self.ladder.rungs[pair_top])
        below_ranked = RankedList.from_entries(self.ladder.rungs[pair_top - 1])
        if not is_stable(self.criterion, top_ranked, below_ranked):
            self.pasha = grow(self.pasha, self.spec)

    def in_flight(self) -> int:
        return len(self._in_flight)

    def should_stop(self) -> bool:
        """True once every config is drawn, nothing runs, nothing is promotable."""
        return (
            self.drawn >= self.config.num_configs
            and not self._in_flight
            and self._find_promotion() is None
        )

    def best_config(self) -> tuple[ConfigId, float, int]:
        """Best entry of the highest nonempty rung, with that rung's resource."""
        k = self.ladder.highest_nonempty()
        if k is None:
            raise InternalError("best_config on an empty ladder")
        best = self.ladder.sorted_rung(k)[0]
        return best.config, best.metric, self.levels[k]


def run_baseline(
    mode: str,
    table,
    resources: ResourceSpec,
    num_configs: int,
    seed: int,
    workers: int = 1,
    random_draws: int | None = None,
):
    """Convenience runner for the reference methods over one benchmark.

    one-epoch evaluates every drawn config at the minimum resource and picks
    the best; no-increase runs the progressive scheduler with growth disabled
    (ladder capped at its starting height); random draws a candidate pool and
    picks one uniformly, spending no simulated time.
    """
    from .simulator import simulate

    config = SchedulerConfig(
        resources=resources,
        num_configs=num_configs,
        mode=mode,
        seed=seed,
        random_draws=random_draws,
    )
    return simulate(config, table, workers)
