"""Grid-search DOA baseline: cosine similarity against theoretical profiles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .array_model import ArrayGeometry, Beambook, theoretical_profile
from .errors import DegenerateInputError, InvalidArgumentError

# Scores this close to the maximum count as ties.
TIE_ATOL = 1e-13


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"length mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DegenerateInputError("cosine similarity of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


@dataclass(frozen=True)
class DoaEstimate:
    alpha_hat: float
    score: float


@dataclass(frozen=True)
class CandidateGrid:
    """Candidate angles with their cached theoretical profiles (one row each)."""

    angles: np.ndarray
    profiles: np.ndarray
    book: Beambook

    @cached_property
    def unit_profiles(self) -> np.ndarray:
        return self.profiles / np.linalg.norm(self.profiles, axis=1, keepdims=True)


def build_grid(book: Beambook, geom: ArrayGeometry, step: float = 0.25) -> CandidateGrid:
    span = geom.scan_max - geom.scan_min
    if not np.isfinite(step) or step <= 0:
        raise InvalidArgumentError(f"grid step must be > 0, got {step}")
    if step > span:
        raise InvalidArgumentError(f"grid step {step} exceeds the scan span {span}")
    count = int(np.floor(span / step + 1e-9)) + 1
    angles = geom.scan_min + step * np.arange(count)
    return CandidateGrid(angles=angles, profiles=theoretical_profile(angles, book, geom), book=book)


def _pick(angles: np.ndarray, scores: np.ndarray) -> int:
    tied = np.flatnonzero(scores >= scores.max() - TIE_ATOL)
    if tied.size == 1:
        return int(tied[0])
    # prefer broadside, then the more negative angle
    order = np.lexsort((angles[tied], np.abs(angles[tied])))
    return int(tied[order[0]])


def estimate(profile, grid: CandidateGrid) -> DoaEstimate:
    """Candidate whose theoretical profile has the highest cosine similarity."""
    values = np.asarray(getattr(profile, "values", profile), dtype=float)
    if values.shape != (grid.profiles.shape[1],):
        raise InvalidArgumentError(
            f"profile has {values.size} beams, grid expects {grid.profiles.shape[1]}"
        )
    norm = np.linalg.norm(values)
    if norm == 0 or not np.isfinite(norm):
        raise DegenerateInputError("profile is zero or non-finite")
    scores = grid.unit_profiles @ (values / norm)
    i = _pick(grid.angles, scores)
    return DoaEstimate(alpha_hat=float(grid.angles[i]), score=float(min(scores[i], 1.0)))


class CorrelationEstimator:
    """Callable wrapper: profile -> estimated angle in degrees."""

    name = "corr"

    def __init__(self, grid: CandidateGrid):
        self.grid = grid

    def __call__(self, profile) -> float:
        return estimate(profile, self.grid).alpha_hat
