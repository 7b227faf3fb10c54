"""Synthetic tabulated learning-curve benchmarks and their on-disk format.

The generator builds curves that rise toward per-config asymptotes. Beyond a
chosen horizon the metric ordering of all configs is frozen by construction:
each config's remaining deficit is capped below its asymptote gap to the next
config, so curves can only cross during the early phase, where bounded
perturbations (damped to zero near the top ranks and vanishing at the
horizon) deliberately scramble the mid-field.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import ConfigId, DataError
from .simulator import Curve, LearningCurveTable

FORMAT_MAGIC = "tunesim-benchmark-v1"

FAMILIES = ("power_law", "exponential_saturation")


class GenerationError(DataError):
    """The requested curve model is infeasible; nothing is silently repaired."""


class FormatError(DataError):
    """A benchmark file does not parse; the message names the offending line."""


@dataclass(frozen=True)
class CurveModel:
    """Shape parameters for synthetic learning curves.

    crossing_horizon is the resource level beyond which the config ordering
    never changes. noise_std perturbs the stored observations only, never the
    latent curves; with hard=False a noise level likely to reorder curves past
    the horizon is rejected instead of silently accepted, with hard=True such
    tables are generated anyway (that is the regime soft ranking exists for).

    The head_* fields keep the best head_count configs well separated so top
    decisions stay meaningful; gap_scale shapes the progressively denser tail.
    early_scale bounds the early-phase perturbations, which ramp in between
    the damp_lo and damp_hi rank fractions (the very best configs stay clean).
    """

    family: str = "power_law"
    crossing_horizon: int = 5
    noise_std: float = 0.0
    hard: bool = False
    top_metric: float = 0.92
    head_count: int = 16
    head_gap: float = 0.03
    head_jitter: float = 0.01
    gap_scale: float = 0.05
    tail_theta: float = 0.45
    decay: float = 1.0
    early_scale: float = 0.05
    damp_lo: float = 0.08
    damp_hi: float = 0.25
    cost_mean: float = 1.0
    cost_spread: float = 0.1

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise GenerationError(
                f"unknown curve family {self.family!r}; expected one of " + ", ".join(FAMILIES)
            )
        if self.crossing_horizon < 1:
            raise GenerationError(f"crossing_horizon must be >= 1, got {self.crossing_horizon}")
        if self.noise_std < 0:
            raise GenerationError(f"noise_std must be >= 0, got {self.noise_std}")
        if not 0.0 < self.tail_theta < 1.0:
            raise GenerationError(f"tail_theta must be in (0, 1), got {self.tail_theta}")
        if self.decay <= 0:
            raise GenerationError(f"decay must be > 0, got {self.decay}")
        if self.top_metric <= 0:
            raise GenerationError(f"top_metric must be > 0, got {self.top_metric}")
        if min(self.head_gap, self.head_jitter, self.gap_scale) <= 0:
            raise GenerationError("head_gap, head_jitter and gap_scale must be > 0")
        if self.head_count < 1:
            raise GenerationError(f"head_count must be >= 1, got {self.head_count}")
        if self.early_scale < 0:
            raise GenerationError(f"early_scale must be >= 0, got {self.early_scale}")
        if not 0.0 <= self.damp_lo < self.damp_hi:
            raise GenerationError("need 0 <= damp_lo < damp_hi")
        if self.cost_mean <= 0 or self.cost_spread < 0:
            raise GenerationError("cost_mean must be > 0 and cost_spread >= 0")


def generate(n_configs: int, units: int, model: CurveModel, seed: int) -> LearningCurveTable:
    """Draw a benchmark of n_configs curves over units resource steps.

    Latent curves are strictly increasing and never cross at or beyond the
    model's crossing_horizon. Observation noise, if any, lands on the stored
    values only. The same arguments always produce an identical table.
    """
    if n_configs < 1:
        raise GenerationError(f"n_configs must be >= 1, got {n_configs}")
    if units < model.crossing_horizon:
        raise GenerationError(
            f"units ({units}) must cover the crossing horizon ({model.crossing_horizon})"
        )
    rng = np.random.default_rng(seed)
    n, horizon = n_configs, model.crossing_horizon

    # asymptote gaps, best rank first; gaps[i] separates rank i from rank i+1
    gaps = np.empty(n)
    head = min(model.head_count, n)
    gaps[:head] = model.head_gap + rng.exponential(model.head_jitter, head)
    if head < n:
        ranks = np.arange(head, n)
        gaps[head:] = rng.exponential(model.gap_scale / np.maximum(ranks, 1))
    gaps = np.maximum(gaps, 1e-9)
    asymptote = model.top_metric - np.concatenate(([0.0], np.cumsum(gaps[:-1])))

    u = np.arange(1, units + 1, dtype=float)
    if model.family == "power_law":
        phi = u**-model.decay
    else:
        phi = np.exp(-model.decay * (u - 1.0))
    if horizon > 1:
        psi = np.where(u < horizon, ((horizon - u) / (horizon - 1)) ** 2, 0.0)
    else:
        psi = np.zeros_like(u)

    rank_fraction = np.arange(n) / n
    damp = np.clip(
        (rank_fraction - model.damp_lo) / (model.damp_hi - model.damp_lo), 0.0, 1.0
    )
    amplitude = model.early_scale * rng.uniform(0.0, 1.0, n) * damp

    latent = (
        asymptote[:, None]
        - model.tail_theta * gaps[:, None] * phi[None, :]
        - amplitude[:, None] * psi[None, :]
    )
    floor = float(latent.min())
    if floor <= 0:
        raise GenerationError(
            f"metric floor {floor:.4f} is not positive; shrink the gaps or raise top_metric"
        )

    observed = latent
    final = latent[:, -1].copy()
    if model.noise_std > 0:
        if not model.hard and n > 1:
            tail = latent[:, horizon - 1 :]
            separation = float(np.min(tail[:-1, :] - tail[1:, :]))
            if separation < 8.0 * model.noise_std:
                raise GenerationError(
                    f"observation noise std {model.noise_std:g} would reorder curves "
                    f"beyond resource {horizon} (min separation {separation:g}); "
                    "set hard=True to generate such a table anyway"
                )
        observed = latent + rng.normal(0.0, model.noise_std, latent.shape)
        final = final + rng.normal(0.0, model.noise_std, n)

    rate = model.cost_mean * np.exp(rng.normal(0.0, model.cost_spread, n))
    ids = rng.permutation(n)  # detach config ids from rank order
    curves = {
        int(ids[i]): Curve(
            metrics=tuple(float(x) for x in observed[i]),
            costs=(float(rate[i]),) * units,
            final_metric=float(final[i]),
        )
        for i in range(n)
    }
    return LearningCurveTable(
        resource_units=units, curves=curves, metric_name="accuracy", unit_label="epoch"
    )


def save(table: LearningCurveTable, path: str) -> None:
    """Write a table in the line-oriented benchmark format.

    Tables ingested from minimize-direction files are written back with their
    original direction and sign, so save followed by load is the identity.
    """
    sign = -1.0 if table.flipped else 1.0
    direction = "minimize" if table.flipped else "maximize"
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(FORMAT_MAGIC + "\n")
        handle.write(f"units={table.resource_units}\n")
        handle.write(f"metric={table.metric_name}\n")
        handle.write(f"unit_label={table.unit_label}\n")
        handle.write(f"direction={direction}\n")
        handle.write(f"configs={len(table.curves)}\n")
        handle.write("\n")
        writer = csv.writer(handle)
        for config in table.config_ids():
            curve = table.curves[config]
            writer.writerow(
                [config, curve.payload]
                + [repr(sign * m) for m in curve.metrics]
                + [repr(c) for c in curve.costs]
                + [repr(sign * curve.final_metric)]
            )


def _parse_header(lines: list[str]) -> tuple[dict[str, str], int]:
    if not lines or lines[0].strip() != FORMAT_MAGIC:
        raise FormatError(f"line 1: not a {FORMAT_MAGIC} file")
    header: dict[str, str] = {}
    index = 1
    while index < len(lines):
        line = lines[index].strip()
        if line == "":
            return header, index + 1
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"line {index + 1}: expected key=value, got {line!r}")
        header[key.strip()] = value.strip()
        index += 1
    raise FormatError("header never ends; expected a blank line before the data rows")


def load(path: str) -> LearningCurveTable:
    """Read a benchmark file, normalizing the metric direction to maximize."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    header, data_start = _parse_header(lines)
    for key in ("units", "configs", "direction"):
        if key not in header:
            raise FormatError(f"header is missing the {key} key")
    try:
        units = int(header["units"])
        declared = int(header["configs"])
    except ValueError as exc:
        raise FormatError(f"header: {exc}") from exc
    if units < 1:
        raise FormatError(f"header: units must be >= 1, got {units}")
    direction = header["direction"]
    if direction not in ("maximize", "minimize"):
        raise FormatError(
            f"header: direction must be maximize or minimize, got {direction!r}"
        )
    sign = -1.0 if direction == "minimize" else 1.0
    expected_fields = 2 + 2 * units + 1
    curves: dict[ConfigId, Curve] = {}
    reader = csv.reader(lines[data_start:])
    for offset, row in enumerate(reader):
        number = data_start + offset + 1
        if not row:
            continue
        if len(row) != expected_fields:
            raise FormatError(
                f"line {number}: expected {expected_fields} fields, got {len(row)}"
            )
        try:
            config = int(row[0])
            values = [float(x) for x in row[2:]]
        except ValueError as exc:
            raise FormatError(f"line {number}: {exc}") from exc
        if config < 0:
            raise FormatError(f"line {number}: config ids must be >= 0, got {config}")
        if config in curves:
            raise FormatError(f"line {number}: duplicate config id {config}")
        if not all(math.isfinite(v) for v in values):
            raise FormatError(f"line {number}: non-finite value")
        metrics = tuple(sign * v for v in values[:units])
        costs = tuple(values[units : 2 * units])
        if any(c <= 0 for c in costs):
            raise FormatError(f"line {number}: costs must be > 0")
        curves[config] = Curve(
            metrics=metrics,
            costs=costs,
            final_metric=sign * values[-1],
            payload=row[1],
        )
    if len(curves) != declared:
        raise FormatError(
            f"header declares {declared} configs but the file holds {len(curves)}"
        )
    return LearningCurveTable(
        resource_units=units,
        curves=curves,
        metric_name=header.get("metric", "metric"),
        unit_label=header.get("unit_label", "unit"),
        flipped=(direction == "minimize"),
    )


def crossing_report(table: LearningCurveTable) -> list[tuple[tuple[ConfigId, ConfigId], int]]:
    """Per config pair whose order ever deviates from the order at full budget,
    the last resource level at which it deviates.

    An empty list means the ordering is already final after the first unit.
    Builds an n x n x units array, so it is meant for desk-scale tables.
    """
    ids = table.config_ids()
    n = len(ids)
    if n < 2:
        return []
    matrix = np.array([table.curves[c].metrics for c in ids])
    sign = np.sign(matrix[:, None, :] - matrix[None, :, :])
    mismatch = sign != sign[:, :, -1:]
    any_mismatch = mismatch.any(axis=2)
    last_index = matrix.shape[1] - 1 - np.argmax(mismatch[:, :, ::-1], axis=2)
    report = []
    for i in range(n):
        for j in range(i + 1, n):
            if any_mismatch[i, j]:
                report.append(((ids[i], ids[j]), int(last_index[i, j]) + 1))
    return report
