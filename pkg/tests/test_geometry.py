import math

import numpy as np
import pytest

from glintprobe.errors import ParameterError
from glintprobe.geometry import (
    DEFAULT_GEOMETRY,
    ImagingGeometry,
    lens_to_sensor_distance,
    reflection_height,
    reflection_pixel_area,
    reflection_pixel_extent,
    reflection_sensor_extent,
)


def geom(**overrides) -> ImagingGeometry:
    return ImagingGeometry.from_dict({**DEFAULT_GEOMETRY.to_dict(), **overrides})


class TestReflectionHeight:
    def test_worked_example(self):
        # independent arithmetic: z = h*r/d
        assert reflection_height(DEFAULT_GEOMETRY) == pytest.approx(14.5 * 1.25 / 30.0, rel=1e-12)
        assert reflection_height(DEFAULT_GEOMETRY) == pytest.approx(0.6041666666, rel=1e-9)

    def test_zero_pattern_rejected(self):
        with pytest.raises(ParameterError):
            geom(pattern_height_cm=0.0)

    def test_linear_in_pattern_height(self):
        doubled = geom(pattern_height_cm=2 * 14.5)
        assert reflection_height(doubled) == pytest.approx(2 * reflection_height(DEFAULT_GEOMETRY), rel=1e-12)


class TestLensToSensorDistance:
    def test_worked_example(self):
        assert lens_to_sensor_distance(DEFAULT_GEOMETRY) == pytest.approx(30 * 0.5 / 29.5, rel=1e-12)
        assert lens_to_sensor_distance(DEFAULT_GEOMETRY) == pytest.approx(0.50847457, rel=1e-7)

    def test_far_field_limit(self):
        far = geom(eye_distance_cm=1e6)
        assert abs(lens_to_sensor_distance(far) - 0.5) < 1e-6

    def test_symmetric_conjugate(self):
        g = geom(eye_distance_cm=1.0, focal_length_cm=0.5)
        assert lens_to_sensor_distance(g) == pytest.approx(1.0, rel=1e-12)

    def test_distance_must_exceed_focal_length(self):
        with pytest.raises(ParameterError):
            geom(eye_distance_cm=0.5, focal_length_cm=0.5)
        with pytest.raises(ParameterError):
            geom(eye_distance_cm=0.4, focal_length_cm=0.5)


class TestSensorExtent:
    def test_worked_example(self):
        expected = 14.5 * 1.25 * 0.5 / (30.0 * (30.0 - 0.5))
        assert reflection_sensor_extent(DEFAULT_GEOMETRY) == pytest.approx(expected, rel=1e-12)
        assert reflection_sensor_extent(DEFAULT_GEOMETRY) == pytest.approx(0.01024011, abs=1e-8)

    def test_consistency_with_z_and_q(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            g = _random_geometry(rng)
            p = reflection_sensor_extent(g)
            z = reflection_height(g)
            q = lens_to_sensor_distance(g)
            assert p == pytest.approx(z * q / g.eye_distance_cm, rel=1e-12)

    def test_decreasing_in_distance(self):
        values = [reflection_sensor_extent(geom(eye_distance_cm=d)) for d in (20.0, 30.0, 50.0, 80.0)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestPixelExtentAndArea:
    def test_worked_example(self):
        expected = 14.5 * 1.25 * 0.5 / (30.0 * 29.5) * 720 / 0.45
        assert reflection_pixel_extent(DEFAULT_GEOMETRY) == pytest.approx(expected, rel=1e-12)
        assert reflection_pixel_extent(DEFAULT_GEOMETRY) == pytest.approx(16.3842, abs=1e-4)

    def test_linear_in_sensor_rows(self):
        assert reflection_pixel_extent(geom(sensor_rows=1440)) == pytest.approx(
            2 * reflection_pixel_extent(DEFAULT_GEOMETRY), rel=1e-12
        )

    def test_inverse_in_sensor_height(self):
        assert reflection_pixel_extent(geom(sensor_height_cm=0.9)) == pytest.approx(
            reflection_pixel_extent(DEFAULT_GEOMETRY) / 2, rel=1e-12
        )

    def test_area_worked_example(self):
        expected = (14.5 * 1.25 * 0.5 * 720 / (0.45 * 30.0 * 29.5)) ** 2
        assert reflection_pixel_area(DEFAULT_GEOMETRY) == pytest.approx(expected, rel=1e-12)
        assert abs(reflection_pixel_area(DEFAULT_GEOMETRY) - 268.44) < 0.01
        # consistent with the ~16x16 px estimate
        assert 230 <= reflection_pixel_area(DEFAULT_GEOMETRY) <= 295

    def test_area_is_square_of_extent(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            g = _random_geometry(rng)
            assert reflection_pixel_area(g) == pytest.approx(reflection_pixel_extent(g) ** 2, rel=1e-12)
            assert reflection_pixel_area(g) >= 0


def _random_geometry(rng) -> ImagingGeometry:
    f = rng.uniform(0.1, 2.0)
    return ImagingGeometry(
        pattern_height_cm=rng.uniform(1.0, 40.0),
        eye_distance_cm=f + rng.uniform(5.0, 100.0),
        eye_radius_cm=rng.uniform(0.5, 2.0),
        focal_length_cm=f,
        sensor_height_cm=rng.uniform(0.1, 2.0),
        sensor_rows=int(rng.integers(240, 4321)),
    )


class TestMonotonicity:
    def test_monotone_in_each_field(self):
        rng = np.random.default_rng(3)
        bump = 1.05
        for _ in range(200):
            g = _random_geometry(rng)
            base = reflection_pixel_extent(g)
            up = {
                "pattern_height_cm": g.pattern_height_cm * bump,
                "eye_radius_cm": g.eye_radius_cm * bump,
                "focal_length_cm": g.focal_length_cm * bump,
                "sensor_rows": g.sensor_rows + 100,
            }
            for name, value in up.items():
                g2 = ImagingGeometry.from_dict({**g.to_dict(), name: value})
                assert reflection_pixel_extent(g2) > base, name
            for name, value in {
                "eye_distance_cm": g.eye_distance_cm * bump,
                "sensor_height_cm": g.sensor_height_cm * bump,
            }.items():
                g2 = ImagingGeometry.from_dict({**g.to_dict(), name: value})
                assert reflection_pixel_extent(g2) < base, name

    def test_dimensionless_scaling_identity(self):
        # p/w is invariant under joint scaling of (h, r, f, d, w)
        rng = np.random.default_rng(5)
        for _ in range(200):
            g = _random_geometry(rng)
            k = rng.uniform(0.3, 4.0)
            scaled = ImagingGeometry(
                pattern_height_cm=g.pattern_height_cm * k,
                eye_distance_cm=g.eye_distance_cm * k,
                eye_radius_cm=g.eye_radius_cm * k,
                focal_length_cm=g.focal_length_cm * k,
                sensor_height_cm=g.sensor_height_cm * k,
                sensor_rows=g.sensor_rows,
            )
            ratio = reflection_sensor_extent(g) / g.sensor_height_cm
            ratio_scaled = reflection_sensor_extent(scaled) / scaled.sensor_height_cm
            assert ratio_scaled == pytest.approx(ratio, rel=1e-12)


class TestValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("pattern_height_cm", -1.0),
            ("eye_distance_cm", 0.0),
            ("eye_radius_cm", -0.1),
            ("focal_length_cm", 0.0),
            ("sensor_height_cm", 0.0),
            ("sensor_rows", 0),
            ("sensor_rows", -720),
        ],
    )
    def test_nonpositive_fields_rejected(self, field, value):
        with pytest.raises(ParameterError):
            geom(**{field: value})

    def test_round_trip_dict(self):
        assert ImagingGeometry.from_dict(DEFAULT_GEOMETRY.to_dict()) == DEFAULT_GEOMETRY

    def test_default_is_paper_setup(self):
        g = DEFAULT_GEOMETRY
        assert (g.pattern_height_cm, g.eye_distance_cm, g.eye_radius_cm) == (14.5, 30.0, 1.25)
        assert (g.focal_length_cm, g.sensor_height_cm, g.sensor_rows) == (0.5, 0.45, 720)
