import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermproj.errors import InputError, ResourceError, SpectrumError
from hermproj.localization import (AnnulusSpec, WeightSpec, annulus_contains, build_annulus_grid,
                                   build_tensor_grid, effective_half_width, grid_to_csv, indicator_times,
                                   oscillation_length, sphere_area, weight_w)
from hermproj.normlab import GridFunction, norm_2_2_gram


def test_membership_examples():
    plus = AnnulusSpec("plus", 0.25, lam=100)
    assert annulus_contains(plus, [7.0, 0.0, 0.0])
    assert not annulus_contains(plus, [8.7, 0.0, 0.0])
    assert annulus_contains(AnnulusSpec("exterior", 0.25, lam=100), [9.0, 0.0, 0.0])
    assert annulus_contains(AnnulusSpec("minus", 0.25, lam=100), [13.0, 0.0])
    assert annulus_contains(AnnulusSpec("ring", 0.25), [0.6, 0.0])
    assert not annulus_contains(AnnulusSpec("ring", 0.25), [0.4, 0.0])


def test_spec_validation():
    with pytest.raises(InputError):
        AnnulusSpec("plus", 0.3)
    with pytest.raises(InputError):
        AnnulusSpec("plus")
    with pytest.raises(InputError):
        AnnulusSpec("disc", 0.25)
    with pytest.raises(InputError):
        AnnulusSpec("ball", radius=-1.0)
    AnnulusSpec("ring", 0.3)


def test_scaled_consistency():
    rng = np.random.default_rng(0)
    x = rng.uniform(-12, 12, (10000, 3))
    for kind in ("plus", "minus", "ring", "exterior"):
        unit = AnnulusSpec(kind, 0.125)
        scaled = unit.scaled(100)
        assert np.array_equal(annulus_contains(scaled, x), annulus_contains(unit, x / 10.0))


def test_weight_examples():
    lam = 64.0
    on_sphere = np.array([8.0, 0.0])
    assert weight_w(WeightSpec(lam, "+"), on_sphere) == 1.0
    assert weight_w(WeightSpec(lam, "-"), on_sphere) == 1.0
    assert weight_w(WeightSpec(lam, "+"), np.zeros(3)) == pytest.approx(17.0, rel=1e-14)
    with pytest.raises(InputError):
        WeightSpec(lam, "*")


@given(st.lists(st.floats(-20, 20), min_size=3, max_size=3), st.floats(1, 400))
@settings(max_examples=100, deadline=None)
def test_weights_min_is_one(x, lam):
    x = np.array(x)
    wp = weight_w(WeightSpec(lam, "+"), x)
    wm = weight_w(WeightSpec(lam, "-"), x)
    assert min(wp, wm) == 1.0
    assert wp * wm >= 1.0
    # zero exponent at the endpoint: w_+^0 w_-^N >= 1
    assert weight_w(WeightSpec(lam, "+", 0.0), x) * weight_w(WeightSpec(lam, "-", 3.0), x) >= 1.0


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_annulus_grid_area_d2():
    spec = AnnulusSpec("plus", 0.25)
    grid = build_annulus_grid(spec, 2, 42)
    assert math.pi * (0.75 ** 2 - 0.5 ** 2) == pytest.approx(0.9817, abs=1e-4)
    assert grid.weights.sum() == pytest.approx(math.pi * (0.75 ** 2 - 0.5 ** 2), rel=0.01)
    assert np.all(grid.weights > 0)
    assert np.all(annulus_contains(spec, grid.points))


@pytest.mark.parametrize("d,lam", [(1, 21), (2, 20), (3, 21)])
@pytest.mark.parametrize("kind,mu", [("plus", 0.125), ("minus", 0.25), ("ring", 0.0625), ("exterior", 0.25)])
def test_grid_volume_and_membership(d, lam, kind, mu):
    spec = AnnulusSpec(kind, mu)
    grid = build_annulus_grid(spec, d, lam)
    assert grid.weights.sum() == pytest.approx(spec.volume(d), rel=0.01)
    assert np.all(grid.weights > 0)
    inside = annulus_contains(spec, grid.points) if kind != "exterior" else grid.radii() >= 1 - mu
    assert np.all(inside)


def test_grid_spacing():
    lam = 40
    grid = build_annulus_grid(AnnulusSpec("plus", 0.25), 2, lam, resolution=4)
    h = oscillation_length(lam) / 4
    r = np.unique(np.round(grid.radii(), 12))
    assert np.max(np.diff(r)) <= h
    n_dirs = grid.meta["n_directions"]
    assert 2 * math.pi * 0.75 / n_dirs <= h


def test_grid_budget_and_validation():
    with pytest.raises(ResourceError):
        build_annulus_grid(AnnulusSpec("plus", 0.25), 3, 81, budget=1000)
    with pytest.raises(InputError):
        build_annulus_grid(AnnulusSpec("plus", 0.25), 2, 40, resolution=1)
    with pytest.raises(SpectrumError):
        build_annulus_grid(AnnulusSpec("plus", 0.25), 2, 41)


def test_tensor_grid():
    lam = 21
    grid = build_tensor_grid(AnnulusSpec("ball", radius=2.0), 3, lam)
    half = effective_half_width(3, lam)
    assert grid.is_tensor and half > 1.0
    assert grid.meta["half_width"] == min(half, 2.0)
    assert grid.points.shape == (grid.size, 3)
    assert np.all(grid.weights[grid.radii() > 2.0] == 0)
    with pytest.raises(InputError):
        build_tensor_grid(AnnulusSpec("plus", 0.25), 2, 20)


def test_resolution_self_convergence():
    spec = AnnulusSpec("plus", 0.25)
    a = norm_2_2_gram(42, 2, spec, resolution=4).value
    b = norm_2_2_gram(42, 2, spec, resolution=8).value
    assert abs(a - b) / b < 0.005


def test_indicator_times():
    grid = build_annulus_grid(AnnulusSpec("ring", 0.25), 2, 20)
    rng = np.random.default_rng(1)
    f = GridFunction(rng.normal(size=grid.size), grid)
    a = indicator_times(f, AnnulusSpec("plus", 0.125))
    b = indicator_times(a, AnnulusSpec("plus", 0.125))
    assert np.array_equal(a.values, b.values)
    c = indicator_times(a, AnnulusSpec("plus", 0.25))
    # dyadic shells share at most their boundary radius
    assert np.all(c.values[grid.radii() != 0.75] == 0)


def test_indicator_cover():
    rng = np.random.default_rng(2)
    r = rng.uniform(0.0, 3.0, 20000)
    r = r[(r != 1.0)]
    mus = [2.0 ** -j for j in range(2, 8)]
    tiny = mus[-1]
    masks = [AnnulusSpec("plus", m).contains_radius(r) for m in mus]
    masks += [AnnulusSpec("minus", m).contains_radius(r) for m in mus]
    masks.append(np.abs(1 - r) < tiny)
    masks.append(r < 0.5)
    masks.append(r > 1.5)
    counts = np.sum(masks, axis=0)
    # the closed shells touch at endpoints; random radii avoid them
    assert np.all(counts == 1)


def test_grid_csv(tmp_path):
    grid = build_annulus_grid(AnnulusSpec("plus", 0.25), 2, 8)
    path = tmp_path / "grid.csv"
    grid_to_csv(grid, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2,weight"
    assert len(lines) == grid.size + 1
    assert float(lines[1].split(",")[-1]) == pytest.approx(grid.weights[0])
