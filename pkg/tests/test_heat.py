import math

import numpy as np
import pytest

from sublevel.field import radial_extremal, sum_sq
from sublevel.geometry import DomainMask, disk_mask, rectangle_mask
from sublevel.heat import (
    HeatState,
    HypothesisError,
    StabilityError,
    check_removed_lengths,
    coarsen,
    evolve,
    half_heating_check,
    heat_content,
    heat_series,
    lemma7_ratio,
    lemma7_ratio_extrapolated,
    series_from_csv,
    series_to_csv,
    stable_dt,
)


def square_heat_content(t, terms=200):
    # unit square, initial 0, boundary 1: content = 1 - (sum 8/(pi^2 m^2) exp(-m^2 pi^2 t))^2 over odd m
    m = 2 * np.arange(terms) + 1
    s = np.sum(8 / (math.pi**2 * m**2) * np.exp(-(m**2) * math.pi**2 * t))
    return 1 - s**2


@pytest.mark.parametrize("t", [0.005, 0.02, 0.1])
def test_square_heat_content_matches_series(t):
    mask = rectangle_mask((0.0, 0.0), (1.0, 1.0), 128)
    q = heat_content(evolve(HeatState.cold(mask), t))
    assert q == pytest.approx(square_heat_content(t), abs=4 * max(mask.spacing))


def test_square_fully_heated_at_late_time():
    mask = rectangle_mask((0.0, 0.0), (1.0, 1.0), 32)
    assert 1 - evolve(HeatState.cold(mask), 2.0).min_temp < 1e-10


def test_heat_content_increases():
    rows = heat_series(disk_mask(1.0, 64), [0.001, 0.01, 0.05, 0.2])
    q = [r["heat_content"] for r in rows]
    assert all(a < b for a, b in zip(q, q[1:]))
    assert all(0 <= r["min_temp"] <= 1 for r in rows)


def test_series_csv_round_trip():
    rows = heat_series(disk_mask(1.0, 32), [0.01, 0.02])
    text = series_to_csv(rows)
    assert text.startswith("time,heat_content,min_temp\n")
    assert series_from_csv(text) == rows


def test_stability_limit_enforced():
    mask = disk_mask(1.0, 32)
    with pytest.raises(StabilityError):
        evolve(HeatState.cold(mask), 0.01, dt=2 * stable_dt(mask))
    assert stable_dt(mask) == pytest.approx(max(mask.spacing) ** 2 / 4)


def test_evolve_rejects_backwards_time():
    s = evolve(HeatState.cold(disk_mask(1.0, 16)), 0.01)
    with pytest.raises(ValueError):
        evolve(s, 0.005)


def test_evolution_splits_consistently():
    mask = disk_mask(1.0, 48)
    a = evolve(HeatState.cold(mask), 0.02)
    b = evolve(evolve(HeatState.cold(mask), 0.01), 0.02)
    assert heat_content(a) == pytest.approx(heat_content(b), rel=1e-3)


def test_disk_ratio_approaches_half_space_value():
    ext = lemma7_ratio_extrapolated(lambda n: disk_mask(1.0, n), 512, [1e-4])
    assert ext[1e-4].value == pytest.approx(2 / math.sqrt(math.pi), rel=0.05)
    # the grid error is first order: the fine value sits below the limit
    assert ext[1e-4].coarse < ext[1e-4].fine < ext[1e-4].value


def _disk_with_hole(radius):
    base = disk_mask(1.0, 256)
    hole = np.linalg.norm(base.points() - np.array([0.3, 0.0]), axis=-1) < radius
    return DomainMask.from_interior(base.interior & ~hole, base.box, label="holed")


def test_short_removed_component_is_rejected():
    mask = _disk_with_hole(0.02)
    with pytest.raises(HypothesisError, match="removed component"):
        check_removed_lengths(mask, 0.04)
    assert len(check_removed_lengths(mask, 1e-4)) == 1
    with pytest.raises(HypothesisError):
        lemma7_ratio(mask, 0.04)


def test_coarsen_keeps_only_full_blocks():
    mask = disk_mask(1.0, 64)
    c = coarsen(mask)
    assert c.resolution[0] == 64 // 2 + 2
    assert c.area <= mask.area
    assert c.spacing[0] == pytest.approx(2 * mask.spacing[0])


def test_half_heating_on_small_disk():
    # f = |x|^2/4 has oscillation r^2/4 on a radius-r disk; pick eps so the hypothesis holds
    r = 0.1
    eps = r * r / 4 / 8
    rep = half_heating_check(disk_mask(r, 64), radial_extremal(2), eps)
    assert rep.passed
    assert rep.min_temp >= 0.5


def test_half_heating_hypotheses():
    with pytest.raises(HypothesisError, match="oscillation"):
        half_heating_check(disk_mask(1.0, 32), radial_extremal(2), 1e-4)
    with pytest.raises(HypothesisError, match="> c"):
        half_heating_check(disk_mask(0.1, 32), sum_sq(), 1e-2, c=2.0)
