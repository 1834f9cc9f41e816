"""Uniform linear array response and beambooks.

The receive array is treated as a uniform linear array in azimuth: the
elevation of the transmitter is fixed, so every response depends only on
``sin(azimuth)``. Angles are degrees at every public interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class ArrayGeometry:
    """Array size, element spacing (wavelengths) and steerable range (degrees)."""

    num_elements: int = 16
    element_spacing: float = 0.5
    scan_min: float = -45.0
    scan_max: float = 45.0

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise InvalidArgumentError(f"num_elements must be a positive integer, got {self.num_elements}")
        if not np.isfinite(self.element_spacing) or self.element_spacing <= 0:
            raise InvalidArgumentError(f"element_spacing must be > 0, got {self.element_spacing}")
        if not (np.isfinite(self.scan_min) and np.isfinite(self.scan_max)) or self.scan_min >= self.scan_max:
            raise InvalidArgumentError(f"need scan_min < scan_max, got {self.scan_min}, {self.scan_max}")


@dataclass(frozen=True)
class Beambook:
    """Ordered steering angles (degrees) the array can switch among."""

    beam_angles: tuple[float, ...]

    def __post_init__(self):
        angles = np.asarray(self.beam_angles, dtype=float)
        if angles.ndim != 1 or angles.size == 0:
            raise InvalidArgumentError("beambook needs at least one angle")
        if not np.all(np.isfinite(angles)):
            raise InvalidArgumentError("beam angles must be finite")
        if np.any(np.diff(angles) <= 0):
            raise InvalidArgumentError("beam angles must be strictly increasing")
        object.__setattr__(self, "beam_angles", tuple(float(a) for a in angles))

    def __len__(self) -> int:
        return len(self.beam_angles)

    @property
    def angles(self) -> np.ndarray:
        return np.array(self.beam_angles)

    def check_within(self, geom: ArrayGeometry) -> None:
        if self.beam_angles[0] < geom.scan_min - 1e-9 or self.beam_angles[-1] > geom.scan_max + 1e-9:
            raise InvalidArgumentError(
                f"beam angles span [{self.beam_angles[0]}, {self.beam_angles[-1]}], "
                f"outside scan range [{geom.scan_min}, {geom.scan_max}]"
            )


def _check_finite(angle) -> np.ndarray:
    a = np.asarray(angle, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError(f"angle must be finite, got {angle!r}")
    return a


def steering_vector(angle, geom: ArrayGeometry) -> np.ndarray:
    """Per-element phasors toward ``angle`` (degrees).

    Element ``k`` is ``exp(j 2 pi d k sin(angle))``. A scalar angle gives a
    vector of length ``num_elements``; an array of angles gives one row per
    angle.
    """
    a = _check_finite(angle)
    k = np.arange(geom.num_elements)
    phase = 2.0 * np.pi * geom.element_spacing * np.multiply.outer(np.sin(np.deg2rad(a)), k)
    return np.exp(1j * phase)


def beam_gain(alpha, beta, geom: ArrayGeometry):
    """Complex gain seen by a beam steered to ``beta`` for a source at ``alpha``.

    Inner product of the source steering vector with the conjugate beam
    steering vector; broadcasts over array-valued angles.
    """
    sa = steering_vector(alpha, geom)
    sb = steering_vector(beta, geom)
    return np.sum(sa * np.conj(sb), axis=-1)


def make_beambook(count: int, geom: ArrayGeometry) -> Beambook:
    """``count`` equally spaced beams covering the scan range, endpoints included."""
    if int(count) != count or count < 2:
        raise InvalidArgumentError(f"beambook needs count >= 2, got {count}")
    return Beambook(tuple(np.linspace(geom.scan_min, geom.scan_max, int(count))))


def slice_indices(full_size: int, b: int) -> np.ndarray:
    """Indices of ``b`` roughly equally spaced entries out of ``full_size``.

    Index ``k`` is ``round(k (full_size - 1) / (b - 1))`` with numpy's
    round-half-to-even, so both endpoints are always included.
    """
    if int(b) != b or b < 2 or b > full_size:
        raise InvalidArgumentError(f"need 2 <= b <= {full_size}, got {b}")
    k = np.arange(int(b))
    return np.round(k * (full_size - 1) / (b - 1)).astype(int)


def slice_beambook(full: Beambook, b: int) -> Beambook:
    idx = slice_indices(len(full), b)
    return Beambook(tuple(full.angles[idx]))


def theoretical_profile(alpha_candidate, book: Beambook, geom: ArrayGeometry) -> np.ndarray:
    """Noiseless power profile ``|g(alpha, beta_n)|^2`` over the beams of ``book``.

    ``alpha_candidate`` may be a scalar (returns shape ``(B,)``) or an array
    of candidates (returns ``(len, B)``).
    """
    a = _check_finite(alpha_candidate)
    if np.any(a < geom.scan_min - 1e-9) or np.any(a > geom.scan_max + 1e-9):
        raise InvalidArgumentError(
            f"candidate angle outside scan range [{geom.scan_min}, {geom.scan_max}]"
        )
    g = beam_gain(a[..., None], book.angles, geom)
    return np.abs(g) ** 2
