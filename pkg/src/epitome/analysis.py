"""Which reference-year entities look most like the world at a given year.

Every distance is between an entity's composition in the reference year
(2015) and the World composition in some other year.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

from .coda import Composition, aitchison_distance
from .demographics import (
    REFERENCE_YEAR,
    WORLD_ID,
    Entity,
    PyramidSeries,
    has_zeros,
    pyramid_to_composition,
)

log = logging.getLogger(__name__)

SECTIONS = ("country", "geographic_region", "un_development_category", "income_category")
DEFAULT_WORLD_YEARS = (1990, 2000, 2010, 2015, 2020, 2030, 2040, 2050, 2060, 2070, 2080)
DEFAULT_THRESHOLD = 1.0
APPENDIX_FROM_YEAR = 2060
APPENDIX_SIZE = 5


class AnalysisError(ValueError):
    pass


class MissingWorldPyramid(AnalysisError):
    pass


class MissingPyramid(AnalysisError):
    pass


class EmptySection(AnalysisError):
    pass


@dataclass(frozen=True)
class EpitomeEntry:
    entity: Entity
    distance: float
    rank: int
    beyond_threshold: bool


@dataclass(frozen=True)
class EpitomeTable:
    world_year: int
    reference_year: int
    section: str
    threshold: float
    entries: tuple[EpitomeEntry, ...]
    zero_replaced: tuple[int, ...] = ()

    def __post_init__(self):
        for prev, cur in zip(self.entries, self.entries[1:]):
            assert prev.distance <= cur.distance and cur.rank == prev.rank + 1
        assert all(e.entity.kind == self.section for e in self.entries)

    def top(self) -> EpitomeEntry | None:
        return self.entries[0] if self.entries else None


@dataclass(frozen=True)
class SimilarityMap:
    world_year: int
    values: dict[str, float]
    unmapped: tuple[Entity, ...]


@dataclass(frozen=True)
class TrajectoryPoint:
    entity: Entity
    world_year: int
    distance: float


def world_composition(series: PyramidSeries, world_year: int, variant: str = "Medium", delta=None) -> Composition:
    p = series.get(WORLD_ID, world_year, variant)
    if p is None:
        raise MissingWorldPyramid(f"no World pyramid for {world_year} (variant {variant})")
    return pyramid_to_composition(p, delta)


def _reference_compositions(
    series: PyramidSeries,
    entities: Iterable[Entity],
    reference_year: int,
    variant: str,
    delta,
    strict: bool,
) -> tuple[list[tuple[Entity, Composition]], list[int]]:
    out, replaced = [], []
    for e in entities:
        p = series.get(e.id, reference_year, variant)
        if p is None:
            if strict:
                raise MissingPyramid(f"no {reference_year} pyramid for {e.name} ({e.id})")
            log.warning("skipping %s (%d): no %d pyramid", e.name, e.id, reference_year)
            continue
        if has_zeros(p):
            replaced.append(e.id)
        out.append((e, pyramid_to_composition(p, delta)))
    return out, replaced


def epitome_table(
    series: PyramidSeries,
    world_year: int,
    section: str = "country",
    threshold: float = DEFAULT_THRESHOLD,
    delta: float | None = None,
    reference_year: int = REFERENCE_YEAR,
    variant: str = "Medium",
    entities: Iterable[Entity] | None = None,
    appendix_from: int = APPENDIX_FROM_YEAR,
    appendix_size: int = APPENDIX_SIZE,
) -> EpitomeTable:
    """Rank the ``section`` entities by distance to the World of ``world_year``.

    Only entries within ``threshold`` are kept, except that from
    ``appendix_from`` onwards the ``appendix_size`` nearest entries beyond the
    threshold are appended and flagged. Ties go to the smaller entity id.
    """
    if section not in SECTIONS:
        raise AnalysisError(f"unknown section {section!r}; expected one of {SECTIONS}")
    world = world_composition(series, world_year, variant, delta)
    pool = series.entities() if entities is None else list(entities)
    members = [e for e in pool if e.kind == section and e.id != WORLD_ID]
    comps, replaced = _reference_compositions(series, members, reference_year, variant, delta, strict=False)
    if not comps:
        raise EmptySection(f"no {section} entities with a {reference_year} pyramid")

    scored = sorted(((aitchison_distance(c, world), e.id, e) for e, c in comps), key=lambda t: t[:2])
    within = [t for t in scored if t[0] <= threshold]
    beyond = [t for t in scored if t[0] > threshold]
    picked = within + (beyond[:appendix_size] if world_year >= appendix_from else [])
    entries = tuple(
        EpitomeEntry(e, d, rank, d > threshold) for rank, (d, _, e) in enumerate(picked, start=1)
    )
    return EpitomeTable(world_year, reference_year, section, threshold, entries, tuple(sorted(replaced)))


def similarity_map_values(
    series: PyramidSeries,
    world_year: int,
    delta: float | None = None,
    reference_year: int = REFERENCE_YEAR,
    variant: str = "Medium",
    entities: Iterable[Entity] | None = None,
) -> SimilarityMap:
    """Unthresholded distance per country, keyed by ISO3 for map joins."""
    world = world_composition(series, world_year, variant, delta)
    pool = series.entities() if entities is None else list(entities)
    countries = [e for e in pool if e.kind == "country"]
    mapped = [e for e in countries if e.iso3]
    unmapped = tuple(e for e in countries if not e.iso3)
    for e in unmapped:
        log.warning("no ISO3 code for %s (%d); left out of the map", e.name, e.id)
    comps, _ = _reference_compositions(series, mapped, reference_year, variant, delta, strict=False)
    values = {e.iso3: aitchison_distance(c, world) for e, c in sorted(comps, key=lambda ec: ec[0].iso3)}
    return SimilarityMap(world_year, values, unmapped)


def distance_trajectory(
    series: PyramidSeries,
    entities: Iterable[Entity],
    world_years: Iterable[int],
    delta: float | None = None,
    reference_year: int = REFERENCE_YEAR,
    variant: str = "Medium",
) -> list[TrajectoryPoint]:
    """Full (entity, world year) grid of distances, entity-major order."""
    years = list(world_years)
    worlds = {y: world_composition(series, y, variant, delta) for y in years}
    comps, _ = _reference_compositions(series, entities, reference_year, variant, delta, strict=True)
    return [
        TrajectoryPoint(e, y, aitchison_distance(c, worlds[y]))
        for e, c in comps
        for y in years
    ]
