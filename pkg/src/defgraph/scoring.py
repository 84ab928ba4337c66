"""EVITA and CVSS rating types and their conversion to probabilities."""

from __future__ import annotations

from dataclasses import astuple, dataclass

__all__ = [
    "CvssRating",
    "EvitaImpactRating",
    "EvitaLikelihoodRating",
    "cvss_prior",
    "evita_prior",
    "impact_score",
]

_LEVELS = (0, 1, 2, 3)


@dataclass(frozen=True)
class EvitaLikelihoodRating:
    """EVITA attack-likelihood factors, each rated 0..3."""

    expertise: int
    knowledge_of_target: int
    window_of_opportunity: int
    equipment: int

    def __post_init__(self):
        for name, value in vars(self).items():
            if value not in _LEVELS:
                raise ValueError(f"{name} must be in 0..3, got {value!r}")


@dataclass(frozen=True)
class EvitaImpactRating:
    """EVITA impact factors, each rated 0..3 (none/low/medium/high)."""

    safety: int
    privacy: int
    operational: int
    financial: int

    def __post_init__(self):
        for name, value in vars(self).items():
            if value not in _LEVELS:
                raise ValueError(f"{name} must be in 0..3, got {value!r}")


@dataclass(frozen=True)
class CvssRating:
    """CVSS base and temporal scores on the 0..10 scale.

    The temporal score is the time-adjusted final score and may never
    exceed the base score.
    """

    base_score: float
    temporal_score: float

    def __post_init__(self):
        if not 0.0 <= self.temporal_score <= self.base_score <= 10.0:
            raise ValueError(
                f"require 0 <= temporal ({self.temporal_score}) <= "
                f"base ({self.base_score}) <= 10")


def evita_prior(rating: EvitaLikelihoodRating) -> float:
    """Detection probability from an EVITA likelihood rating: sum of the
    four factors over the maximum total of 12."""
    return sum(astuple(rating)) / 12.0


def cvss_prior(rating: CvssRating) -> float:
    """Detection probability from a CVSS rating: temporal score over 10.

    The base score is carried for reporting only; the temporal score is
    the final time-adjusted value.
    """
    return rating.temporal_score / 10.0


def impact_score(rating: EvitaImpactRating) -> float:
    """Impact severity in [0, 1]: sum of the four factors over 12."""
    return sum(astuple(rating)) / 12.0
