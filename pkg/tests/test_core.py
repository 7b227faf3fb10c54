"""Resource geometry, progressive cap growth, and rung ladder invariants."""

import pytest

from tunesim import (
    InternalError,
    PashaState,
    ResourceSpec,
    RungEntry,
    RungLadder,
    UsageError,
    grow,
    initial_pasha_state,
    max_rung_index,
    rung_levels,
    rung_resource,
)


def spec(r=1, eta=3, cap=81):
    return ResourceSpec(min_resource=r, reduction_factor=eta, max_resource=cap)


def floor_log(value: int, base: int) -> int:
    # integer floor of log_base(value), by repeated multiplication
    k, power = 0, 1
    while power * base <= value:
        power *= base
        k += 1
    return k


class TestResourceSpec:
    def test_rejects_nonpositive_min_resource(self):
        with pytest.raises(UsageError):
            ResourceSpec(0, 3, 81)

    def test_rejects_reduction_factor_below_two(self):
        with pytest.raises(UsageError):
            ResourceSpec(1, 1, 81)

    def test_rejects_cap_below_initial_ladder(self):
        # the cap must fit at least the rung-2 resource
        with pytest.raises(UsageError):
            ResourceSpec(1, 3, 8)

    def test_accepts_minimal_cap(self):
        assert spec(cap=9).max_resource == 9


class TestRungResource:
    def test_rung_zero_is_min_resource(self):
        assert rung_resource(0, spec()) == 1

    def test_power_growth(self):
        assert rung_resource(2, spec()) == 9
        assert rung_resource(3, ResourceSpec(2, 4, 128)) == 128

    def test_scales_with_min_resource(self):
        assert rung_resource(2, spec(r=5)) == 45

    def test_negative_rung_rejected(self):
        with pytest.raises(ValueError):
            rung_resource(-1, spec())


class TestMaxRungIndex:
    def test_exact_power_cap(self):
        assert max_rung_index(spec(cap=81)) == 4

    def test_cap_between_powers(self):
        assert max_rung_index(spec(cap=200)) == 4
        assert max_rung_index(spec(cap=242)) == 4
        assert max_rung_index(spec(cap=243)) == 5

    def test_matches_integer_log_floor(self):
        for r in range(1, 6):
            for eta in (2, 3, 4):
                for cap in range(eta * eta * r, eta * eta * r + 400, 7):
                    assert max_rung_index(spec(r, eta, cap)) == floor_log(cap // r, eta)


class TestRungLevels:
    def test_exact_power_ladder(self):
        assert rung_levels(spec(cap=81)) == (1, 3, 9, 27, 81)

    def test_cap_appended_when_not_a_power(self):
        assert rung_levels(spec(cap=200)) == (1, 3, 9, 27, 81, 200)

    def test_levels_strictly_increase(self):
        for eta in (2, 3, 4):
            for cap in (eta * eta, 50, 81, 100, 200):
                if cap < eta * eta:
                    continue
                levels = rung_levels(spec(eta=eta, cap=cap))
                assert all(a < b for a, b in zip(levels, levels[1:]))
                assert levels[-1] == cap


class TestInitialState:
    def test_values(self):
        assert initial_pasha_state(spec(cap=200)) == PashaState(0, 9, 2)
        assert initial_pasha_state(spec(eta=2, cap=64)) == PashaState(0, 4, 2)
        assert initial_pasha_state(spec(r=5, cap=405)) == PashaState(0, 45, 2)


class TestGrow:
    def test_multiplies_cap_by_reduction_factor(self):
        state = grow(initial_pasha_state(spec(cap=200)), spec(cap=200))
        assert state == PashaState(1, 27, 3)

    def test_overshoot_clamps_to_cap(self):
        # from cap 81 the next step would be 243 > 200: clamp, top rung stays 4
        state = grow(PashaState(2, 81, 4), spec(cap=200))
        assert state == PashaState(3, 200, 4)

    def test_growth_at_cap_is_noop(self):
        clamped = PashaState(3, 200, 4)
        assert grow(clamped, spec(cap=200)) is clamped

    def test_cap_never_decreases(self):
        s = spec(cap=200)
        state = initial_pasha_state(s)
        for _ in range(10):
            nxt = grow(state, s)
            assert nxt.resource_cap >= state.resource_cap
            state = nxt
        assert state.resource_cap == 200

    def test_top_rung_tracks_min_of_linear_and_log(self):
        for r in range(1, 6):
            for eta in (2, 3, 4):
                for extra in (0, 1, 5, 37):
                    s = spec(r, eta, eta * eta * r * eta**2 + extra)
                    state = initial_pasha_state(s)
                    for t in range(7):
                        expected = min(t + 2, floor_log(s.max_resource // r, eta))
                        assert state.top_rung == expected
                        state = grow(state, s)


class TestRungLadder:
    def test_levels_must_increase(self):
        with pytest.raises(ValueError):
            RungLadder.empty((1, 3, 3))

    def test_insert_rejects_out_of_range_rung(self):
        ladder = RungLadder.empty((1, 3, 9))
        with pytest.raises(InternalError):
            ladder.insert(3, RungEntry(0, 0.5))

    def test_insert_rejects_non_finite_metric(self):
        ladder = RungLadder.empty((1, 3, 9))
        with pytest.raises(InternalError):
            ladder.insert(0, RungEntry(0, float("nan")))

    def test_insert_rejects_duplicate_config_per_rung(self):
        ladder = RungLadder.empty((1, 3, 9))
        ladder.insert(0, RungEntry(0, 0.5))
        with pytest.raises(InternalError):
            ladder.insert(0, RungEntry(0, 0.6))

    def test_upper_rung_requires_promotion_below(self):
        ladder = RungLadder.empty((1, 3, 9))
        with pytest.raises(InternalError):
            ladder.insert(1, RungEntry(0, 0.5))
        ladder.insert(0, RungEntry(0, 0.5, promoted=True))
        ladder.insert(1, RungEntry(0, 0.55))  # now legal
        assert [len(r) for r in ladder.rungs] == [1, 1, 0]

    def test_occupied_rungs_form_a_prefix(self):
        ladder = RungLadder.empty((1, 3, 9, 27))
        for k in range(3):
            ladder.insert(k, RungEntry(7, 0.5 + k / 10, promoted=True))
        occupied = [k for k, rung in enumerate(ladder.rungs) if rung]
        assert occupied == list(range(len(occupied)))

    def test_sorted_rung_breaks_ties_by_completion_index(self):
        ladder = RungLadder.empty((1, 3, 9))
        ladder.insert(0, RungEntry(0, 0.5, completion_index=1))
        ladder.insert(0, RungEntry(1, 0.5, completion_index=0))
        ladder.insert(0, RungEntry(2, 0.9, completion_index=2))
        assert [e.config for e in ladder.sorted_rung(0)] == [2, 1, 0]

    def test_highest_nonempty(self):
        ladder = RungLadder.empty((1, 3, 9))
        assert ladder.highest_nonempty() is None
        ladder.insert(0, RungEntry(0, 0.5, promoted=True))
        assert ladder.highest_nonempty() == 0
        ladder.insert(1, RungEntry(0, 0.6))
        assert ladder.highest_nonempty() == 1
