import math
from dataclasses import replace

import numpy as np
import pytest

from echoscaffold.phantom import (
    DegradationSeries,
    PhantomSpec,
    ellipse_mask,
    generate_phantom,
    generate_series,
    speckle_factor,
)
from echoscaffold.segmentation import histogram, otsu_threshold

SMALL = PhantomSpec(width=160, height=100, cx=79.5, cy=49.5, a=50.5, b=28.5)


def test_deterministic():
    a, _ = generate_phantom(SMALL)
    b, _ = generate_phantom(SMALL)
    np.testing.assert_array_equal(a, b)
    c, _ = generate_phantom(replace(SMALL, seed=1))
    assert not np.array_equal(a, c)


def test_noiseless_two_tone():
    spec = replace(SMALL, background_noise=0, scaffold_noise=0)
    image, mask = generate_phantom(spec)
    assert set(np.unique(image).tolist()) == {70, 170}
    np.testing.assert_array_equal(image == 70, mask == 0)


def test_circle_area():
    r = 30.0
    mask = ellipse_mask(101, 101, 50, 50, r, r)
    assert abs(np.count_nonzero(mask == 0) - math.pi * r * r) <= 4 * r


def test_ellipse_mask_values():
    mask = ellipse_mask(20, 10, 9.5, 4.5, 5.5, 2.5)
    assert set(np.unique(mask).tolist()) == {0, 255}
    assert mask[4, 9] == 0 and mask[0, 0] == 255


def test_speckle_statistics(rng):
    f = speckle_factor(rng, (400, 400), 0.15)
    assert f.mean() == pytest.approx(1.0, abs=0.005)
    assert f.std() == pytest.approx(0.15, abs=0.005)
    assert (f >= 0).all()
    assert (speckle_factor(rng, (3, 3), 0) == 1).all()


def test_series_areas_shrink():
    frames = generate_series(DegradationSeries(PhantomSpec(), steps=4, shrink=0.9))
    areas = [f[2] for f in frames]
    assert all(b < a for a, b in zip(areas, areas[1:]))
    for a, b in zip(areas, areas[1:]):
        assert b / a == pytest.approx(0.81, abs=0.02)


def test_series_mean_schedule():
    s = DegradationSeries(PhantomSpec(), steps=3, mean_schedule=(70, 50, 90))
    assert [s.spec_at(k).scaffold_mean for k in range(3)] == [70, 50, 90]
    s = DegradationSeries(PhantomSpec(), steps=3, mean_increment=5)
    assert [s.spec_at(k).scaffold_mean for k in range(3)] == [70, 75, 80]


@pytest.mark.parametrize("kwargs", [
    dict(a=200), dict(scaffold_mean=200), dict(background_noise=-1), dict(width=0), dict(b=0.5),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        replace(PhantomSpec(), **kwargs).validate()


@pytest.mark.parametrize("kwargs", [dict(steps=0), dict(shrink=1.5), dict(steps=2, mean_schedule=(1,))])
def test_series_validation(kwargs):
    with pytest.raises(ValueError):
        DegradationSeries(PhantomSpec(), **kwargs).validate()


def test_otsu_separates_classes():
    ok = 0
    for seed in range(40):
        image, mask = generate_phantom(replace(SMALL, seed=seed))
        t = otsu_threshold(histogram(image)).threshold
        inside, outside = image[mask == 0], image[mask == 255]
        if inside.mean() < t <= outside.mean():
            ok += 1
    assert ok >= 0.95 * 40
