"""Shared builders for hand-constructed tables and ranked lists."""

from __future__ import annotations

from tunesim import Curve, LearningCurveTable, RankedList

# readable config ids for ranking tests
A, B, C, D, E = 0, 1, 2, 3, 4


def ranked(*pairs: tuple[int, float]) -> RankedList:
    """RankedList from (config, metric) pairs given best first.

    Completion indices follow the argument order, so exact ties keep it.
    """
    return RankedList(tuple(pairs))


def table_from_rows(
    rows: dict[int, list[float]],
    costs: dict[int, list[float]] | None = None,
    finals: dict[int, float] | None = None,
) -> LearningCurveTable:
    """Table with explicit metric rows; costs default to 1 second per unit."""
    units = len(next(iter(rows.values())))
    curves = {}
    for config, metrics in rows.items():
        curve_costs = costs[config] if costs else [1.0] * units
        final = finals[config] if finals else metrics[-1]
        curves[config] = Curve(
            metrics=tuple(metrics), costs=tuple(curve_costs), final_metric=final
        )
    return LearningCurveTable(resource_units=units, curves=curves)


class ScriptedSearcher:
    """Deterministic searcher handing out a fixed id sequence."""

    def __init__(self, order):
        self.order = list(order)
        self.next = 0

    def draw(self) -> int:
        config = self.order[self.next]
        self.next += 1
        return config
