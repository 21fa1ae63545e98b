import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublevel.experiments import (
    ChampagneSpec,
    PlacementError,
    ScalingFit,
    fit_scaling,
    geometric_grid,
    gradient_integral,
    gradient_integral_refinement,
    make_champagne,
    pigeonhole_levels,
    verify_carbery,
    verify_prop2_prop4,
    verify_thm2,
    verify_thm3,
    verify_vdcorput,
)
from sublevel.experiments.report import Check, Row, VerificationReport, report_from_json, rows_from_csv, try_fit
from sublevel.experiments.statements import quadratic_sublevel
from sublevel.field import constant, harmonic_probe, radial_extremal, skew, sum_sq
from sublevel.geometry import disk_mask

BOX = ((-1.0, 1.0), (-1.0, 1.0))


# scaling fits


def test_fit_exact_square():
    p = np.array([0.1, 0.2, 0.5, 1.0])
    fit = fit_scaling(list(zip(p, p**2)))
    assert fit.exponent == pytest.approx(2.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_points == 4


def test_fit_exact_root_with_intercept():
    p = np.geomspace(1e-3, 1, 5)
    fit = fit_scaling(list(zip(p, 3 * np.sqrt(p))))
    assert fit.exponent == pytest.approx(0.5)
    assert fit.log_intercept == pytest.approx(math.log(3))


@settings(max_examples=30, deadline=None)
@given(k=st.floats(-3, 3), c=st.floats(0.1, 10), noise=st.lists(st.floats(-0.1, 0.1), min_size=5, max_size=5))
def test_fit_r_squared_in_unit_interval(k, c, noise):
    p = np.geomspace(1e-2, 1, 5)
    fit = fit_scaling(list(zip(p, c * p**k * np.exp(noise))))
    assert 0.0 <= fit.r_squared <= 1.0


@pytest.mark.parametrize("pairs", [[(1, 1), (2, 2)], [(1, 1), (2, 0), (3, 3)], [(1, 1), (-2, 2), (3, 3)]])
def test_fit_rejects_bad_input(pairs):
    with pytest.raises(ValueError):
        fit_scaling(pairs)


def test_try_fit_absent_with_few_points():
    assert try_fit([(1, 1), (2, 2)]) is None
    assert isinstance(try_fit([(1, 1), (2, 2), (3, 3)]), ScalingFit)


def test_geometric_grid_density():
    g = geometric_grid(1e-3, 1e-1)
    assert len(g) == 17
    assert np.allclose(np.diff(np.log(g)), np.log(10) / 8)


# reports


def _report():
    rows = [Row("x", 0.1, 1.0, 2.0, True), Row("x", 0.2, 3.0, 0.0, False)]
    return VerificationReport("demo", rows, None, [Check("c", math.nan, "> 0", True)], {"arr": np.arange(2)}, 5)


def test_report_pass_and_first_failure():
    r = _report()
    assert not r.passed
    assert r.first_failure().startswith("row x parameter=0.2")


def test_report_json_round_trip():
    r = _report()
    d = report_from_json(r.to_json())
    assert d["statement"] == "demo" and d["seed"] == 5 and d["pass"] is False
    assert d["rows"][1]["ratio"] is None  # inf is not valid JSON
    assert d["checks"][0]["value"] is None
    assert d["extra"]["arr"] == [0, 1]
    assert r.to_json() == _report().to_json()


def test_report_csv_round_trip():
    text = _report().to_csv()
    assert text.splitlines()[0] == "label,parameter,lhs,rhs,ratio,pass"
    assert "\r" not in text
    rows = rows_from_csv(text)
    assert rows[0]["ratio"] == 0.5 and rows[0]["pass"] is True
    assert math.isinf(rows[1]["ratio"]) and rows[1]["pass"] is False


# champagne


def test_zero_bubbles_is_plain_disk():
    a = make_champagne(ChampagneSpec(bubbles=0), 128)
    b = disk_mask(1.0, 128)
    assert a.symmetric_difference(b) == 0
    assert a.perimeter == pytest.approx(2 * math.pi)


def test_champagne_deterministic():
    spec = ChampagneSpec(bubbles=50, r_b=0.02, seed=11)
    a, b = make_champagne(spec, 256), make_champagne(spec, 256)
    assert np.array_equal(a.classes, b.classes)


def test_champagne_nested():
    small, _ = ChampagneSpec(bubbles=10, seed=3).place()
    big, _ = ChampagneSpec(bubbles=30, seed=3).place()
    assert np.array_equal(big[:10], small)


@settings(max_examples=15, deadline=None)
@given(n=st.integers(0, 40), seed=st.integers(0, 2**32), r_b=st.floats(0.005, 0.05), sep=st.floats(0.0, 0.02))
def test_champagne_invariants(n, seed, r_b, sep):
    spec = ChampagneSpec(bubbles=n, r_b=r_b, seed=seed, min_separation=sep)
    c, r = spec.place()
    assert len(r) == n
    assert np.all(np.linalg.norm(c, axis=1) + r + sep <= spec.outer_radius + 1e-12)
    if n > 1:
        d = np.linalg.norm(c[:, None] - c[None], axis=-1) - r[:, None] - r[None]
        assert d[~np.eye(n, dtype=bool)].min() >= sep - 1e-12


def test_power_law_radii_in_range():
    _, r = ChampagneSpec(bubbles=40, radius_law="power", r_min=0.005, r_b=0.03, seed=2).place()
    assert r.min() >= 0.005 and r.max() <= 0.03
    assert len(set(r.tolist())) > 1


def test_placement_error_reports_count():
    with pytest.raises(PlacementError) as exc:
        ChampagneSpec(bubbles=200, r_b=0.2, retry_cap=50).place()
    assert 0 < exc.value.achieved < 200


def test_champagne_spec_validation():
    with pytest.raises(ValueError):
        ChampagneSpec(radius_law="cubic")
    with pytest.raises(ValueError):
        ChampagneSpec(bubbles=-1)


# gradient integral and pigeonholing


def test_gradient_integral_of_constant_is_zero():
    assert gradient_integral(constant(1.0), 1.0, resolution=64).value == 0.0


def test_gradient_integral_stable_for_alpha_one():
    ref = gradient_integral_refinement(sum_sq(), 1.0, resolution=512)
    assert ref.stable
    assert not ref.fine.divergence_suspected


def test_gradient_integral_flags_alpha_above_three_halves():
    # radial reduction: int r * r^(-2 alpha) * r dr diverges at 0 for alpha >= 3/2
    ref = gradient_integral_refinement(sum_sq(), 1.6, resolution=256)
    assert ref.coarse.divergence_suspected
    assert ref.fine.value >= 1.2 * ref.coarse.value


def test_gradient_integral_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        gradient_integral(sum_sq(), 0.0)


def test_pigeonhole_picks_smallest_circle():
    eps = 0.01
    f = sum_sq().shifted(-1.5 * eps)
    lv = pigeonhole_levels(f, eps, 16, box=BOX, resolution=512)
    assert lv.t2 == pytest.approx(eps * (1 + 1 / 16))
    assert lv.length2 == pytest.approx(2 * math.pi * math.sqrt(lv.t2 + 1.5 * eps), rel=5e-3)
    assert lv.ok


def test_pigeonhole_empty_bands_give_zero():
    eps = 0.01
    lv = pigeonhole_levels(sum_sq().shifted(1.0), eps, 8, box=BOX, resolution=64)
    assert lv.length1 == 0.0 and lv.length2 == 0.0


def test_pigeonhole_doubling_scan_never_increases():
    f = harmonic_probe(0.1, 3).shifted(-0.02)
    a = pigeonhole_levels(f, 0.01, 8, box=BOX, resolution=256)
    b = pigeonhole_levels(f, 0.01, 16, box=BOX, resolution=256)
    assert b.length1 <= a.length1 and b.length2 <= a.length2


def test_pigeonhole_validation():
    with pytest.raises(ValueError):
        pigeonhole_levels(sum_sq(), 0.01, 4)
    with pytest.raises(ValueError):
        pigeonhole_levels(sum_sq(), -1.0)


# statements


@pytest.mark.parametrize("k", [2, 3])
def test_vdcorput_exponent(k):
    r = verify_vdcorput(k)
    assert r.passed
    assert r.fit.exponent == pytest.approx(1 / k, abs=0.03)


def test_vdcorput_single_point_has_no_fit():
    r = verify_vdcorput(2, [1e-3])
    assert r.fit is None
    assert not r.passed


def test_carbery_ellipse_oracle():
    # area of {0.5 x^2 + 0.5 y^2 <= s} is 2 pi s
    for s in (1e-3, 1e-2, 0.1):
        assert quadratic_sublevel((0.5, 0.5), s) == pytest.approx(2 * math.pi * s, rel=2e-3)


def test_carbery_affine_probe_and_control():
    r = verify_carbery((0.05, 5.0))
    assert r.passed
    assert r.fit.exponent == pytest.approx(1.0, abs=0.05)
    assert r.check("negative_control").value >= 10


def test_carbery_rescales_with_warning():
    with pytest.warns(UserWarning, match="rescaled"):
        r = verify_carbery((1.0, 1.0), [1e-3, 1e-2, 1e-1])
    assert r.extra["a"] == pytest.approx([0.5, 0.5])


def test_carbery_rejects_nonconvex():
    with pytest.raises(ValueError):
        verify_carbery((1.0, -1.0))


def test_prop2_slack_for_sum_sq():
    r = verify_prop2_prop4(sum_sq(), [0.25, 0.5, 1.0], [])
    assert r.passed
    for row in r.rows:
        assert row.ratio == pytest.approx(4.0, rel=0.02)


def test_prop2_prop4_harmonic_perturbation_still_passes():
    r = verify_prop2_prop4(harmonic_probe(0.05, 3), [0.5, 1.0], [(0.2, 0.1), (-0.4, 0.3)])
    assert r.passed


def test_prop2_rejects_laplacian_below_one():
    with pytest.raises(ValueError, match="laplacian"):
        verify_prop2_prop4(skew(), [0.5], [])


def test_thm3_single_member_closed_form():
    # |x|^2/4 on [0,1]^2: sup = 1/2 and |{f >= k}| = 1 - pi k for k <= 1/4
    r = verify_thm3([radial_extremal(2)], resolution=256)
    k = r.extra["certificate"]
    assert k > 0.01
    assert (1 - math.pi * k) * 0.5 == pytest.approx(k, abs=0.01)


def test_thm3_rejections():
    with pytest.raises(ValueError):
        verify_thm3([])
    with pytest.raises(ValueError, match="laplacian"):
        verify_thm3([skew()])


def test_thm2_rejects_laplacian_above_c():
    with pytest.raises(ValueError, match="> c"):
        verify_thm2(sum_sq().scaled(0.25), c=0.5)
