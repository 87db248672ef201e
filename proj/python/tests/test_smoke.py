import math

import pytest

import contact_decay as cd


def closed_form(p):
    return (1.0 - math.sqrt(1.0 - p * p)) / p


def test_version():
    assert cd.__version__.count(".") == 2


def test_hitting_probability_matches_closed_form():
    value, err = cd.hitting_probability(1, 0.6)
    assert abs(value - 1.0 / 3.0) < 1e-7
    assert err <= 1e-8


def test_monte_carlo_hitting_probability():
    value, se = cd.hitting_probability_mc(1, 0.6, 200_000, seed=3)
    assert abs(value - closed_form(0.6)) < 3 * se


def test_fixed_point_and_bounds():
    fp = cd.fixed_point(0.2, 1)
    assert fp["p_star"] == pytest.approx(0.518459, abs=1e-5)
    b = cd.rate_bounds(0.2, 1)
    assert b["lower"] == pytest.approx(-0.743, abs=1e-3)
    assert b["upper"] == pytest.approx(-0.6)
    zero = cd.rate_bounds(0.0, 2)
    assert zero["lower"] == -1.0 and zero["upper"] == -1.0
    super_ = cd.rate_bounds(0.4, 2)
    assert super_["lower"] is None and super_["warning"]


def test_fixed_point_rejects_supercritical():
    with pytest.raises(ValueError):
        cd.fixed_point(0.5, 1)


def test_eigencheck_and_negative_control():
    assert cd.eigencheck(0.2, 1)["passed"]
    assert not cd.eigencheck(0.2, 1, p_shift=0.05)["passed"]


def test_heat_kernel():
    series, matrix_exp = cd.heat_kernel(0.5, 1, 1.0)
    assert series == pytest.approx(math.exp(-1.0) * 1.2660658777520082, rel=1e-12)
    assert matrix_exp == pytest.approx(series, rel=1e-7)


def test_survival_curve_pure_death():
    times = [0.5 * i for i in range(13)]
    out = cd.survival_curve(1, 0.0, times=times, reps=50_000, seed=2)
    assert out["p_hat"][0] == 1.0
    assert abs(out["regression"]["rate"] + 1.0) < 0.05
    for t, p in zip(times, out["p_hat"]):
        se = math.sqrt(math.exp(-t) * (1 - math.exp(-t)) / out["n"])
        assert abs(p - math.exp(-t)) <= 3 * se + 1e-12


def test_limit_scan_upper_bound_is_exact():
    rows = cd.limit_scan(0.25, [1, 2])
    assert [r["upper"] for r in rows] == [-0.5, -0.5]
    assert rows[1]["gap_p"] < rows[0]["gap_p"]
