"""Optical model of the on-sensor size of a corneal reflection.

The screen probe of physical height h, viewed from distance d, reflects off
the (approximately spherical, radius r) cornea into a virtual image of height
h*r/d.  A thin lens of focal length f images that onto the sensor plane at
q = d*f/(d-f), giving a sensor extent of h*r*f/(d*(d-f)) which the sensor's
vertical resolution converts to pixels.  Vertical and horizontal directions
are treated symmetrically: one extent serves both axes.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

from .errors import ParameterError


@dataclass(frozen=True)
class ImagingGeometry:
    """Physical scene parameters, all lengths in centimeters."""

    pattern_height_cm: float
    eye_distance_cm: float
    eye_radius_cm: float
    focal_length_cm: float
    sensor_height_cm: float
    sensor_rows: int

    def __post_init__(self):
        for name in (
            "pattern_height_cm",
            "eye_distance_cm",
            "eye_radius_cm",
            "focal_length_cm",
            "sensor_height_cm",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ParameterError(f"{name} must be a positive real, got {value!r}")
        if not (isinstance(self.sensor_rows, int) and self.sensor_rows > 0):
            raise ParameterError(f"sensor_rows must be a positive integer, got {self.sensor_rows!r}")
        if self.eye_distance_cm <= self.focal_length_cm:
            raise ParameterError(
                "eye_distance_cm must exceed focal_length_cm "
                f"({self.eye_distance_cm} <= {self.focal_length_cm})"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ImagingGeometry":
        try:
            return cls(
                pattern_height_cm=float(d["pattern_height_cm"]),
                eye_distance_cm=float(d["eye_distance_cm"]),
                eye_radius_cm=float(d["eye_radius_cm"]),
                focal_length_cm=float(d["focal_length_cm"]),
                sensor_height_cm=float(d["sensor_height_cm"]),
                sensor_rows=int(d["sensor_rows"]),
            )
        except KeyError as exc:
            raise ParameterError(f"geometry config missing key {exc}") from exc


#: Laptop + webcam setup used as the worked example and as simulator default:
#: 14.5 cm probe, 30 cm viewing distance, 1.25 cm eyeball, f = 0.5 cm,
#: 0.45 cm sensor with 720-pixel scan lines.
DEFAULT_GEOMETRY = ImagingGeometry(
    pattern_height_cm=14.5,
    eye_distance_cm=30.0,
    eye_radius_cm=1.25,
    focal_length_cm=0.5,
    sensor_height_cm=0.45,
    sensor_rows=720,
)


def reflection_height(g: ImagingGeometry) -> float:
    """Physical height (cm) of the probe's reflection on the cornea: h*r/d."""
    return g.pattern_height_cm * g.eye_radius_cm / g.eye_distance_cm


def lens_to_sensor_distance(g: ImagingGeometry) -> float:
    """Lens-to-sensor distance (cm) from the thin-lens equation: d*f/(d-f)."""
    return g.eye_distance_cm * g.focal_length_cm / (g.eye_distance_cm - g.focal_length_cm)


def reflection_sensor_extent(g: ImagingGeometry) -> float:
    """Extent (cm) of the reflection on the sensor plane: h*r*f/(d*(d-f))."""
    d, f = g.eye_distance_cm, g.focal_length_cm
    return g.pattern_height_cm * g.eye_radius_cm * f / (d * (d - f))


def reflection_pixel_extent(g: ImagingGeometry) -> float:
    """Reflection extent in sensor pixels along one axis: p*M/w."""
    return reflection_sensor_extent(g) * g.sensor_rows / g.sensor_height_cm


def reflection_pixel_area(g: ImagingGeometry) -> float:
    """Approximate pixel count covered by the (square) reflection: (p*M/w)**2."""
    return reflection_pixel_extent(g) ** 2
