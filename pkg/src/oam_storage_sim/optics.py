"""Laguerre-Gaussian mode algebra, field sampling and vortex diagnostics.

Sign convention: a mode of charge ``m`` carries the azimuthal phase
``exp(-i m phi)``, with ``phi`` counterclockwise in the beam's own transverse
frame (looking along its propagation direction). Forward beams share the lab
frame; a backward beam's own frame is the lab frame with ``x`` reflected.

Lengths are micrometres throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptyInput, GridMismatch, InvalidInput, LowAmplitude, MixedDirections, NonIntegerWinding

CS_D2_WAVELENGTH_UM = 0.8523

CHARGE_SAMPLES = 512
AMPLITUDE_FLOOR = 1e-6
WINDING_TOLERANCE = 0.05


class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    @property
    def flipped(self) -> "Direction":
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


class Transform(str, enum.Enum):
    MIRROR = "mirror"
    THROUGH_FOCUS = "through_focus"


@dataclass(frozen=True)
class ModeSpec:
    """One LG_0^m component: charge, waist, axial position and complex weight."""

    charge: int
    waist: float
    z: float = 0.0
    weight: complex = 1.0 + 0.0j
    center: tuple[float, float] = (0.0, 0.0)
    direction: Direction = Direction.FORWARD
    radial: int = 0
    wavelength: float = CS_D2_WAVELENGTH_UM

    def __post_init__(self):
        if int(self.charge) != self.charge:
            raise InvalidInput(f"charge must be an integer, got {self.charge!r}")
        if self.radial != 0:
            raise InvalidInput("only radial index p = 0 is supported")
        if not (self.waist > 0 and math.isfinite(self.waist)):
            raise InvalidInput(f"waist must be > 0, got {self.waist!r}")
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise InvalidInput(f"wavelength must be > 0, got {self.wavelength!r}")
        if not (math.isfinite(self.z) and np.isfinite(complex(self.weight))):
            raise InvalidInput("z and weight must be finite")
        object.__setattr__(self, "charge", int(self.charge))
        object.__setattr__(self, "weight", complex(self.weight))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist**2 / self.wavelength


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid; ``origin`` is the physical position of pixel (0, 0)."""

    width: int
    height: int
    pitch: float
    origin: tuple[float, float] | None = None

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise InvalidInput("grid needs at least 2x2 pixels")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise InvalidInput("pitch must be > 0")
        if self.origin is None:
            # symmetric about (0, 0)
            origin = (-(self.width - 1) * self.pitch / 2, -(self.height - 1) * self.pitch / 2)
        else:
            origin = (float(self.origin[0]), float(self.origin[1]))
        object.__setattr__(self, "origin", origin)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` arrays of shape ``(height, width)``; rows follow y."""
        x = self.origin[0] + self.pitch * np.arange(self.width)
        y = self.origin[1] + self.pitch * np.arange(self.height)
        return np.meshgrid(x, y)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Sampled complex amplitudes; ``data[row, col]`` sits at ``(x, y)`` of the grid."""

    data: np.ndarray
    pitch: float
    origin: tuple[float, float] = (0.0, 0.0)
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        data = np.array(self.data, dtype=np.complex128)
        if data.ndim != 2 or min(data.shape) < 2:
            raise InvalidInput(f"field must be 2-D with at least 2x2 pixels, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidInput("field amplitudes must be finite")
        if not self.pitch > 0:
            raise InvalidInput("pitch must be > 0")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "direction", Direction(self.direction))

    @classmethod
    def zeros(cls, grid: GridSpec, direction: Direction = Direction.FORWARD) -> "ComplexField":
        return cls(np.zeros((grid.height, grid.width), complex), grid.pitch, grid.origin, direction)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.width, self.height, self.pitch, self.origin)

    def power(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2) * self.pitch**2)

    def intensity(self) -> np.ndarray:
        return np.abs(self.data) ** 2

    def with_data(self, data: np.ndarray) -> "ComplexField":
        return replace(self, data=data)

    def same_grid(self, other: "ComplexField") -> bool:
        return (
            self.data.shape == other.data.shape
            and math.isclose(self.pitch, other.pitch, rel_tol=1e-12)
            and np.allclose(self.origin, other.origin, rtol=0, atol=1e-9 * self.pitch)
        )


def lg_amplitude(spec: ModeSpec, x, y):
    """Weighted, unit-power LG_0^m amplitude at lab coordinates ``(x, y)``.

    Away from the waist the usual paraxial factors apply: waist growth,
    wavefront curvature ``exp(i k r^2 / 2R)`` and Gouy phase
    ``exp(-i (|m|+1) arctan(z / z_R))``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - spec.center[0]
    dy = y - spec.center[1]
    if spec.direction is Direction.BACKWARD:
        dx = -dx
    m = abs(spec.charge)
    w0, z = spec.waist, spec.z
    z_r = spec.rayleigh_range
    w = w0 * math.sqrt(1.0 + (z / z_r) ** 2)
    r2 = dx * dx + dy * dy
    phi = np.arctan2(dy, dx)

    norm = math.sqrt(2.0 / (math.pi * math.factorial(m))) / w
    radial = (np.sqrt(2.0 * r2) / w) ** m * np.exp(-r2 / w**2)
    k = 2.0 * math.pi / spec.wavelength
    inv_r = z / (z * z + z_r * z_r)
    gouy = (m + 1) * math.atan2(z, z_r)
    phase = -spec.charge * phi + 0.5 * k * r2 * inv_r - gouy
    out = spec.weight * norm * radial * np.exp(1j * phase)
    return out if out.ndim else complex(out)


def sample_superposition(specs: Sequence[ModeSpec], grid: GridSpec) -> ComplexField:
    """Pointwise sum of the modes on ``grid``; an empty list samples to zero."""
    directions = {s.direction for s in specs}
    if len(directions) > 1:
        raise MixedDirections("all modes in a superposition must share one direction")
    direction = directions.pop() if directions else Direction.FORWARD
    X, Y = grid.coordinates()
    data = np.zeros(X.shape, complex)
    for spec in specs:
        data += lg_amplitude(spec, X, Y)
    return ComplexField(data, grid.pitch, grid.origin, direction)


def transform_mode(specs: Sequence[ModeSpec], op: Transform | str) -> list[ModeSpec]:
    """Apply a parity element of the imaging path to every mode.

    ``mirror`` reflects the x axis (charge and x-offset change sign).
    ``through_focus`` carries each mode across its waist: ``z -> -z`` and the
    accumulated Gouy phase ``exp(-i (|m|+1) pi)`` multiplies the weight.
    """
    if not specs:
        raise EmptyInput("transform_mode needs at least one mode")
    op = Transform(op)
    if op is Transform.MIRROR:
        return [replace(s, charge=-s.charge, center=(-s.center[0], s.center[1])) for s in specs]
    out = []
    for s in specs:
        gouy = complex(np.exp(-1j * (abs(s.charge) + 1) * math.pi))
        out.append(replace(s, z=-s.z, weight=s.weight * gouy))
    return out


def phase_conjugate(specs: Sequence[ModeSpec]) -> list[ModeSpec]:
    """Modes whose sampled sum is the complex conjugate of the input's.

    The conjugate travels the other way; in its own frame it keeps the charge
    while the wavefront curvature reverses (``z -> -z``). The factor
    ``(-1)^m`` comes from the x reflection between the two frames.
    """
    return [
        replace(s, z=-s.z, weight=np.conj(s.weight) * (-1) ** abs(s.charge), direction=s.direction.flipped)
        for s in specs
    ]


def interference_image(a: ComplexField, b: ComplexField) -> np.ndarray:
    if not a.same_grid(b):
        raise GridMismatch("interfering fields must share grid dimensions, pitch and origin")
    return np.abs(a.data + b.data) ** 2


def conjugate(f: ComplexField) -> ComplexField:
    return f.with_data(np.conj(f.data))


def flip_frame(f: ComplexField) -> ComplexField:
    """Reflect x so the result is sampled in the mirrored transverse frame.

    For a backward field this is its own frame. The point ``(x, y)`` maps to
    ``(-x, y)``.
    """
    ox, oy = f.origin
    new_ox = -(ox + (f.width - 1) * f.pitch)
    return replace(f, data=f.data[:, ::-1], origin=(new_ox, oy))


def overlap(a: ComplexField, b: ComplexField) -> complex:
    """Discrete inner product <a|b> = sum(conj(a) b) pitch^2."""
    if not a.same_grid(b):
        raise GridMismatch("overlap needs identical grids")
    return complex(np.vdot(a.data, b.data) * a.pitch**2)


def _pixel_coords(f: ComplexField, x, y):
    cols = (np.asarray(x) - f.origin[0]) / f.pitch
    rows = (np.asarray(y) - f.origin[1]) / f.pitch
    return rows, cols


def _sample_circle(image: np.ndarray, origin, pitch, center, radius, n):
    phi = 2.0 * math.pi * np.arange(n) / n
    x = center[0] + radius * np.cos(phi)
    y = center[1] + radius * np.sin(phi)
    cols = (x - origin[0]) / pitch
    rows = (y - origin[1]) / pitch
    h, w = image.shape
    if rows.min() < 0 or cols.min() < 0 or rows.max() > h - 1 or cols.max() > w - 1:
        raise InvalidInput(f"circle of radius {radius} um around {tuple(center)} leaves the grid")
    coords = np.vstack([rows, cols])
    if np.iscomplexobj(image):
        re = ndimage.map_coordinates(image.real, coords, order=1)
        im = ndimage.map_coordinates(image.imag, coords, order=1)
        return phi, re + 1j * im
    return phi, ndimage.map_coordinates(image, coords, order=1)


def winding(field: ComplexField, radius: float, center=(0.0, 0.0), samples: int = CHARGE_SAMPLES) -> float:
    """Raw charge estimate ``-(1/2pi) * loop integral of d(arg E)``, unrounded."""
    samples = max(int(samples), 256)
    _, values = _sample_circle(field.data, field.origin, field.pitch, center, radius, samples)
    floor = AMPLITUDE_FLOOR * float(np.max(np.abs(field.data)))
    if floor == 0.0 or np.min(np.abs(values)) <= floor:
        raise LowAmplitude(f"field amplitude on the r={radius} um circle falls below {floor:.3g}")
    steps = np.angle(np.roll(values, -1) / values)
    return -float(np.sum(steps)) / (2.0 * math.pi)


def measure_charge(field: ComplexField, radius: float, center=(0.0, 0.0), samples: int = CHARGE_SAMPLES) -> int:
    """Topological charge enclosed by a circle, in the grid's (lab) frame."""
    w = winding(field, radius, center, samples)
    n = round(w)
    if abs(w - n) > WINDING_TOLERANCE:
        raise NonIntegerWinding(f"winding {w:.4f} is not within {WINDING_TOLERANCE} of an integer")
    return int(n)


def own_frame_charge(field: ComplexField, radius: float, center=(0.0, 0.0)) -> int:
    """Charge seen looking along the field's own propagation direction."""
    if field.direction is Direction.FORWARD:
        return measure_charge(field, radius, center)
    return measure_charge(flip_frame(field), radius, (-center[0], center[1]))


@dataclass(frozen=True)
class SpiralFit:
    slope: float  # rad per um of fringe-maximum angle versus radius
    angles: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)

    @property
    def sense(self) -> int:
        return int(np.sign(self.slope))


def fringe_angles(image: np.ndarray, grid: GridSpec, center, radii, samples: int = 720) -> np.ndarray:
    """Angle of the brightest fringe on each ring, unwrapped across rings."""
    angles = []
    for r in radii:
        phi, ring = _sample_circle(np.asarray(image, float), grid.origin, grid.pitch, center, r, samples)
        angles.append(np.angle(np.sum(ring * np.exp(-1j * phi))))
    return np.unwrap(np.array(angles))


def spiral_sense(image: np.ndarray, grid: GridSpec, center=(0.0, 0.0), radii=None) -> SpiralFit:
    """Regress the fringe-maximum angle against radius; the slope sign is the spiral sense."""
    if radii is None:
        rmax = 0.4 * min(grid.width, grid.height) * grid.pitch
        radii = np.linspace(0.1 * rmax, rmax, 40)
    radii = np.asarray(radii, float)
    angles = fringe_angles(image, grid, center, radii)
    slope = float(np.polyfit(radii, angles, 1)[0])
    return SpiralFit(slope, angles, radii)


def count_fringes(image: np.ndarray, grid: GridSpec, radius: float, center=(0.0, 0.0), samples: int = 720) -> int:
    """Number of bright fringes crossed going once around a circle."""
    _, ring = _sample_circle(np.asarray(image, float), grid.origin, grid.pitch, center, radius, samples)
    s = np.sign(ring - ring.mean())
    s[s == 0] = 1
    return int(np.sum((s < 0) & (np.roll(s, -1) > 0)))
