"""Uniform circular and concentric circular array geometries.

Azimuths are measured counterclockwise from the +x axis. Public functions
take degrees where a user would type a number (``offset_deg``); everything
stored on the objects is in radians and meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_SOUND_SPEED = 343.0


class GeometryError(ValueError):
    """Raised for physically invalid array descriptions."""


@dataclass(frozen=True)
class Ring:
    """One uniform circular ring of microphones.

    Parameters
    ----------
    radius : float
        Ring radius in meters.
    n_mics : int
        Number of equally spaced elements.
    angular_offset : float
        Angle of mic 0 in radians.
    """

    radius: float
    n_mics: int
    angular_offset: float = 0.0

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GeometryError(f"ring radius must be positive, got {self.radius}")
        if int(self.n_mics) != self.n_mics or self.n_mics < 3:
            raise GeometryError(f"a ring needs at least 3 mics, got {self.n_mics}")
        object.__setattr__(self, "n_mics", int(self.n_mics))

    @property
    def mic_angles(self) -> np.ndarray:
        """Physical angle of every element, radians."""
        return self.angular_offset + 2 * np.pi * np.arange(self.n_mics) / self.n_mics


@dataclass(frozen=True)
class ArrayGeometry:
    """A UCA (one ring) or UCCA (several concentric rings).

    Rings are kept outermost first; this is also the channel order.
    """

    rings: tuple[Ring, ...]
    sound_speed: float = DEFAULT_SOUND_SPEED
    name: str = field(default="", compare=False)

    def __post_init__(self):
        rings = tuple(self.rings)
        if len(rings) < 1:
            raise GeometryError("geometry needs at least one ring")
        radii = [r.radius for r in rings]
        if len(set(radii)) != len(radii):
            raise GeometryError(f"ring radii must be distinct, got {radii}")
        if not (self.sound_speed > 0 and math.isfinite(self.sound_speed)):
            raise GeometryError(f"sound speed must be positive, got {self.sound_speed}")
        object.__setattr__(self, "rings", rings)

    @property
    def n_rings(self) -> int:
        return len(self.rings)

    @property
    def n_channels(self) -> int:
        return sum(r.n_mics for r in self.rings)

    @property
    def radii(self) -> np.ndarray:
        return np.array([r.radius for r in self.rings])

    def channel_slices(self) -> list[slice]:
        """Channel index range of each ring in ring-major order."""
        out, start = [], 0
        for ring in self.rings:
            out.append(slice(start, start + ring.n_mics))
            start += ring.n_mics
        return out

    @classmethod
    def from_rings(
        cls,
        rings: Iterable[dict],
        sound_speed: float = DEFAULT_SOUND_SPEED,
        name: str = "",
    ) -> "ArrayGeometry":
        """Build from config-style dicts with keys radius_m, n_mics, offset_deg."""
        built = []
        for spec in rings:
            try:
                built.append(
                    Ring(
                        radius=float(spec["radius_m"]),
                        n_mics=spec["n_mics"],
                        angular_offset=math.radians(float(spec.get("offset_deg", 0.0))),
                    )
                )
            except KeyError as exc:
                raise GeometryError(f"ring entry missing key {exc}") from None
        return cls(tuple(built), sound_speed=float(sound_speed), name=name)


def uca_small(sound_speed: float = DEFAULT_SOUND_SPEED) -> ArrayGeometry:
    """Inner ring on its own: 7 mics at 4 cm."""
    return ArrayGeometry((Ring(0.04, 7),), sound_speed, name="UCA_S")


def uca_large(sound_speed: float = DEFAULT_SOUND_SPEED) -> ArrayGeometry:
    """Outer ring on its own: 9 mics at 6 cm."""
    return ArrayGeometry((Ring(0.06, 9),), sound_speed, name="UCA_L")


def ucca(sound_speed: float = DEFAULT_SOUND_SPEED) -> ArrayGeometry:
    """Two-ring array: 9 mics at 6 cm around 7 mics at 4 cm."""
    return ArrayGeometry((Ring(0.06, 9), Ring(0.04, 7)), sound_speed, name="UCCA")


NAMED_GEOMETRIES = {"UCA_S": uca_small, "UCA_L": uca_large, "UCCA": ucca}


def named_geometry(name: str, sound_speed: float = DEFAULT_SOUND_SPEED) -> ArrayGeometry:
    try:
        factory = NAMED_GEOMETRIES[name]
    except KeyError:
        raise GeometryError(
            f"unknown geometry {name!r}; choose from {sorted(NAMED_GEOMETRIES)}"
        ) from None
    return factory(sound_speed)


def mic_positions(geometry: ArrayGeometry) -> np.ndarray:
    """Planar mic coordinates, shape ``(n_channels, 2)``, ring-major order."""
    chunks = []
    for ring in geometry.rings:
        ang = ring.mic_angles
        chunks.append(np.column_stack((ring.radius * np.cos(ang), ring.radius * np.sin(ang))))
    return np.vstack(chunks)


def mic_angles(geometry: ArrayGeometry) -> np.ndarray:
    """Angle of every channel in ring-major order, radians."""
    return np.concatenate([ring.mic_angles for ring in geometry.rings])


def chord_length(radius: float, n_mics: int) -> float:
    """Distance between neighbouring elements of ``n_mics`` on a circle."""
    # n_mics == 2 gives the diameter
    return 2.0 * radius * math.sin(math.pi / n_mics)


def inter_element_distance(ring: Ring) -> float:
    return chord_length(ring.radius, ring.n_mics)


def spacing_aliasing_frequency(spacing: float, sound_speed: float = DEFAULT_SOUND_SPEED) -> float:
    if spacing <= 0 or sound_speed <= 0:
        raise GeometryError("spacing and sound speed must be positive")
    return sound_speed / (2.0 * spacing)


def aliasing_frequency(ring: Ring, sound_speed: float = DEFAULT_SOUND_SPEED) -> float:
    """Spatial aliasing frequency ``c / (2 d)`` for the ring's element spacing."""
    return spacing_aliasing_frequency(inter_element_distance(ring), sound_speed)


def max_order(geometry: ArrayGeometry | Sequence[Ring]) -> int:
    """Largest harmonic order L with ``N_p >= 2L + 1`` on every ring."""
    rings = geometry.rings if isinstance(geometry, ArrayGeometry) else geometry
    return min((r.n_mics - 1) // 2 for r in rings)
