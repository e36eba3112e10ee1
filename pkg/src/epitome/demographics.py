"""Age-structure data: entity catalog, WPP ingestion, fixtures, compositions.

Two input layouts are understood:

* long format, one row per (area, year, variant, age group), as distributed
  by the UN World Population Prospects. Column names are configurable through
  :class:`ColumnMap`.
* wide fixture format, first column the age class, one pyramid per remaining
  column (the bundled ``figure2.csv`` / ``figure6_centroids.csv``).
"""
from __future__ import annotations

import csv
import io
import logging
import os
import re
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .coda import AllZero, Composition, closure, zero_replace

log = logging.getLogger(__name__)

AGE_LABELS = tuple(f"{a}-{a + 4}" for a in range(0, 100, 5)) + ("100+",)
N_BINS = len(AGE_LABELS)
_AGE_INDEX = {label: i for i, label in enumerate(AGE_LABELS)}

KINDS = ("country", "geographic_region", "un_development_category", "income_category", "world", "other")
AGGREGATE_KINDS = KINDS[1:5]

WORLD_ID = 900
REFERENCE_YEAR = 2015
MIN_POPULATION = 90_000
FIXTURE_DELTA = 0.005

UNIT_SCALE = {"persons": 1.0, "thousands": 1000.0, "percent": None}

DATA_DIR_ENV = "EPITOME_DATA_DIR"


class DataError(ValueError):
    """Base class for ingestion failures."""


class MissingBin(DataError):
    pass


class DuplicateRow(DataError):
    pass


class UnparsableValue(DataError):
    pass


class UnrecognizedAgeGroup(UnparsableValue):
    pass


class MissingColumn(DataError):
    pass


class EmptyTable(DataError):
    pass


def normalize_age_label(label: str) -> str:
    """Canonical form of an age-group label: ``"05-09"`` -> ``"5-9"``.

    Raises UnrecognizedAgeGroup for anything outside the 21 quinquennial bins.
    """
    s = re.sub(r"\s+", "", str(label))
    m = re.fullmatch(r"(\d+)-(\d+)|(\d+)\+", s)
    if m:
        s = f"{int(m[1])}-{int(m[2])}" if m[1] is not None else f"{int(m[3])}+"
    if s not in _AGE_INDEX:
        raise UnrecognizedAgeGroup(f"unrecognized age group {label!r}")
    return s


def age_index(label: str) -> int:
    return _AGE_INDEX[normalize_age_label(label)]


# -- entities ----------------------------------------------------------------


@dataclass(frozen=True)
class Entity:
    id: int
    name: str
    kind: str
    iso3: str | None = None
    population_2015: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entity kind {self.kind!r}")


def data_dir() -> Path:
    """Root holding ``data/`` and ``fixtures/``; overridable via EPITOME_DATA_DIR."""
    override = os.environ.get(DATA_DIR_ENV)
    return Path(override) if override else Path(__file__).resolve().parent


class EntityCatalog:
    """Static M49 knowledge: country ISO3 codes and aggregate kinds."""

    def __init__(self, countries: dict[int, tuple[str, str]], aggregates: dict[int, tuple[str, str]]):
        self.countries = countries
        self.aggregates = aggregates
        self._by_name = {}
        for code, (_, name) in countries.items():
            self._by_name.setdefault(name.casefold(), code)
        for code, (name, _) in aggregates.items():
            self._by_name.setdefault(name.casefold(), code)

    @classmethod
    def load(cls, root: Path | None = None) -> "EntityCatalog":
        root = Path(root) if root is not None else data_dir()
        countries, aggregates = {}, {}
        with open(root / "data" / "m49_to_iso3.csv", newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                countries[int(row["m49"])] = (row["iso3"], row["name"])
        with open(root / "data" / "aggregates.csv", newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                aggregates[int(row["m49"])] = (row["name"], row["kind"])
        return cls(countries, aggregates)

    def kind_of(self, code: int) -> str:
        if code == WORLD_ID:
            return "world"
        if code in self.aggregates:
            return self.aggregates[code][1]
        if 1500 <= code < 1600:
            return "income_category"
        # M49 country codes stop below 900; everything above is a grouping
        if code >= 900:
            return "geographic_region"
        return "country"

    def iso3_of(self, code: int) -> str | None:
        hit = self.countries.get(code)
        return hit[0] if hit else None

    def entity(self, code: int, name: str | None = None) -> Entity:
        code = int(code)
        if name is None:
            if code in self.countries:
                name = self.countries[code][1]
            elif code in self.aggregates:
                name = self.aggregates[code][0]
            else:
                name = str(code)
        kind = self.kind_of(code)
        iso3 = self.iso3_of(code) if kind == "country" else None
        return Entity(code, name, kind, iso3)

    def lookup_name(self, name: str) -> Entity | None:
        code = self._by_name.get(name.strip().casefold())
        return None if code is None else self.entity(code)


@lru_cache(maxsize=4)
def _cached_catalog(root: str) -> EntityCatalog:
    return EntityCatalog.load(Path(root))


def default_catalog() -> EntityCatalog:
    return _cached_catalog(str(data_dir()))


# -- pyramids ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AgePyramid:
    """Both-sexes population of one entity-year in 21 quinquennial bins."""

    entity: Entity
    year: int
    variant: str
    values: np.ndarray
    unit: str = "thousands"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.shape != (N_BINS,):
            raise MissingBin(f"{self.key}: expected {N_BINS} bins, got {values.shape}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise UnparsableValue(f"{self.key}: values must be finite and nonnegative")
        if not np.any(values > 0):
            raise AllZero(f"{self.key}: every age group is zero")
        if not 1950 <= self.year <= 2100:
            raise DataError(f"{self.key}: year outside 1950-2100")
        if self.unit not in UNIT_SCALE:
            raise DataError(f"unknown unit {self.unit!r}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def key(self) -> tuple[int, int, str]:
        return (self.entity.id, self.year, self.variant)

    @property
    def total_persons(self) -> float | None:
        scale = UNIT_SCALE[self.unit]
        return None if scale is None else float(self.values.sum() * scale)


class PyramidSeries:
    """Pyramids keyed by (entity id, year, variant); no duplicate keys."""

    def __init__(self, pyramids: Iterable[AgePyramid] = ()):
        self._items: dict[tuple[int, int, str], AgePyramid] = {}
        self._entities: dict[int, Entity] = {}
        for p in pyramids:
            self.add(p)

    def add(self, p: AgePyramid):
        if p.key in self._items:
            raise DuplicateRow(f"duplicate pyramid for {p.key}")
        self._items[p.key] = p
        self._entities.setdefault(p.entity.id, p.entity)

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items[k] for k in sorted(self._items))

    def __contains__(self, key):
        return key in self._items

    def get(self, entity_id: int, year: int, variant: str = "Medium") -> AgePyramid | None:
        """Pyramid for an entity-year.

        Falls back to another variant when the requested one is absent and
        exactly one other variant exists for that year (estimate years carry a
        single variant).
        """
        hit = self._items.get((entity_id, year, variant))
        if hit is not None:
            return hit
        others = [p for (e, y, _), p in self._items.items() if e == entity_id and y == year]
        return others[0] if len(others) == 1 else None

    def entities(self) -> list[Entity]:
        return [self._entities[i] for i in sorted(self._entities)]

    def entity(self, entity_id: int) -> Entity | None:
        return self._entities.get(entity_id)

    def years(self, entity_id: int | None = None) -> list[int]:
        return sorted({y for (e, y, _) in self._items if entity_id is None or e == entity_id})

    def find_entity(self, query: str) -> Entity | None:
        """Resolve a numeric id, ISO3 code or (case-insensitive) name."""
        q = str(query).strip()
        if q.lstrip("-").isdigit():
            return self._entities.get(int(q))
        for e in self.entities():
            if e.name.casefold() == q.casefold() or (e.iso3 and e.iso3 == q.upper()):
                return e
        return None

    def with_entities(self, entities: Iterable[Entity]) -> "PyramidSeries":
        """Copy restricted to the given entities."""
        keep = {e.id for e in entities}
        return PyramidSeries(p for p in self if p.entity.id in keep)


# -- long-format ingestion -----------------------------------------------------


@dataclass(frozen=True)
class ColumnMap:
    """Role -> column-name mapping for long-format WPP tables.

    Defaults follow the 2015-revision population-by-age-group CSV, where
    values are in thousands and past estimates carry their own variant label.
    """

    entity_id: str = "LocID"
    entity_name: str = "Location"
    variant: str = "Variant"
    year: str = "Time"
    age_group: str = "AgeGrp"
    value: str = "PopTotal"
    unit: str = "thousands"
    estimate_variants: tuple[str, ...] = ("Estimates",)
    last_estimate_year: int = REFERENCE_YEAR

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnMap":
        d = dict(d)
        if "estimate_variants" in d:
            d["estimate_variants"] = tuple(d["estimate_variants"])
        return cls(**d)

    def roles(self) -> dict[str, str]:
        return {
            "entity_id": self.entity_id,
            "entity_name": self.entity_name,
            "variant": self.variant,
            "year": self.year,
            "age_group": self.age_group,
            "value": self.value,
        }


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8-sig")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def _reader(fh: IO[str]):
    header = fh.readline()
    if not header.strip():
        raise EmptyTable("table is empty")
    delimiter = "\t" if "\t" in header else ","
    columns = next(csv.reader([header], delimiter=delimiter))
    return [c.strip() for c in columns], csv.reader(fh, delimiter=delimiter)


def _parse_number(text: str, where: str) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise UnparsableValue(f"{where}: cannot parse {text!r} as a number") from None
    if not np.isfinite(x) or x < 0:
        raise UnparsableValue(f"{where}: value {text!r} must be finite and nonnegative")
    return x


def parse_wpp_csv(
    source,
    column_map: ColumnMap | None = None,
    variant: str = "Medium",
    years: Iterable[int] | None = None,
    catalog: EntityCatalog | None = None,
) -> PyramidSeries:
    """Read a long-format population-by-age table into a PyramidSeries.

    Rows of other projection variants are dropped; rows whose variant is one
    of ``column_map.estimate_variants`` are kept up to ``last_estimate_year``.
    ``years`` restricts ingestion (early WPP years use an open 80+ group and
    would otherwise fail the 21-bin check).
    """
    cmap = column_map or ColumnMap()
    catalog = catalog or default_catalog()
    wanted_years = None if years is None else {int(y) for y in years}
    fh = _open_text(source)
    try:
        columns, rows = _reader(fh)
        index = {}
        for role, name in cmap.roles().items():
            if name not in columns:
                raise MissingColumn(f"column {name!r} (role {role}) not in header {columns}")
            index[role] = columns.index(name)

        bins: dict[tuple[int, int, str], list] = {}
        names: dict[int, str] = {}
        for lineno, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"row {lineno}"
            try:
                cells = {role: row[i].strip() for role, i in index.items()}
            except IndexError:
                raise UnparsableValue(f"{where}: expected {len(columns)} fields, got {len(row)}") from None
            try:
                year = int(float(cells["year"]))
                code = int(float(cells["entity_id"]))
            except ValueError:
                raise UnparsableValue(f"{where}: bad year or entity id {cells['year']!r}/{cells['entity_id']!r}") from None
            row_variant = cells["variant"]
            if row_variant != variant and not (
                row_variant in cmap.estimate_variants and year <= cmap.last_estimate_year
            ):
                continue
            if wanted_years is not None and year not in wanted_years:
                continue
            try:
                age = age_index(cells["age_group"])
            except UnrecognizedAgeGroup as exc:
                raise UnrecognizedAgeGroup(f"{where}: {exc}") from None
            value = _parse_number(cells["value"], where)
            key = (code, year, row_variant)
            slot = bins.setdefault(key, [None] * N_BINS)
            if slot[age] is not None:
                raise DuplicateRow(f"{where}: duplicate age group {AGE_LABELS[age]} for {key}")
            slot[age] = value
            names.setdefault(code, cells["entity_name"])
    finally:
        if isinstance(source, (str, Path)):
            fh.close()

    series = PyramidSeries()
    entities = {code: catalog.entity(code, name) for code, name in names.items()}
    for key in sorted(bins):
        slot = bins[key]
        missing = [AGE_LABELS[i] for i, v in enumerate(slot) if v is None]
        if missing:
            raise MissingBin(f"{key}: missing age groups {missing}")
        code, year, row_variant = key
        series.add(AgePyramid(entities[code], year, row_variant, np.array(slot), cmap.unit))
    log.info("ingested %d pyramids for %d entities", len(series), len(entities))
    return series


# -- wide fixture tables -------------------------------------------------------


def _split_header(label: str, default_year: int) -> tuple[str, int]:
    m = re.fullmatch(r"\s*(.*?)\s+(\d{4})\s*", label)
    if m:
        return m[1], int(m[2])
    return label.strip(), default_year


def parse_fixture_table(
    source, catalog: EntityCatalog | None = None, default_year: int = REFERENCE_YEAR
) -> list[tuple[str, AgePyramid]]:
    """Read a wide percent table; returns (column label, pyramid) in column order.

    Column headers of the form ``"<name> <year>"`` are split; names are
    resolved against the catalog, unknown ones become kind ``"other"`` with a
    negative id.
    """
    catalog = catalog or default_catalog()
    fh = _open_text(source)
    try:
        columns, rows = _reader(fh)
        labels = columns[1:]
        if not labels:
            raise EmptyTable("fixture table has no pyramid columns")
        values = np.full((N_BINS, len(labels)), np.nan)
        for lineno, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"row {lineno}"
            try:
                age = age_index(row[0])
            except UnrecognizedAgeGroup as exc:
                raise UnrecognizedAgeGroup(f"{where}: {exc}") from None
            if len(row) != len(columns):
                raise UnparsableValue(f"{where}: expected {len(columns)} fields, got {len(row)}")
            if not np.all(np.isnan(values[age])):
                raise DuplicateRow(f"{where}: duplicate age group {AGE_LABELS[age]}")
            values[age] = [_parse_number(c.strip(), where) for c in row[1:]]
    finally:
        if isinstance(source, (str, Path)):
            fh.close()

    if np.all(np.isnan(values)):
        raise EmptyTable("fixture table has no data rows")
    missing = [AGE_LABELS[i] for i in range(N_BINS) if np.isnan(values[i, 0])]
    if missing:
        raise MissingBin(f"fixture table missing age groups {missing}")

    out = []
    for j, label in enumerate(labels):
        name, year = _split_header(label, default_year)
        entity = catalog.lookup_name(name) or Entity(-(j + 1), name, "other")
        out.append((label, AgePyramid(entity, year, "fixture", values[:, j], "percent")))
    return out


def serialize_fixture_table(pyramids: Iterable[tuple[str, AgePyramid]], decimals: int | None = None) -> str:
    """Inverse of :func:`parse_fixture_table`; oldest age group first.

    With ``decimals=None`` values are written with ``repr`` so a re-parse is
    bit-identical.
    """
    pairs = list(pyramids)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Class"] + [label for label, _ in pairs])
    for i in reversed(range(N_BINS)):
        cells = [p.values[i] for _, p in pairs]
        fmt = repr if decimals is None else (lambda x: f"{x:.{decimals}f}")
        w.writerow([AGE_LABELS[i]] + [fmt(float(x)) for x in cells])
    return buf.getvalue()


def load_fixture(name: str = "figure2.csv") -> list[tuple[str, AgePyramid]]:
    return parse_fixture_table(data_dir() / "fixtures" / name)


def fixture_series(name: str = "figure2.csv") -> PyramidSeries:
    return PyramidSeries(p for _, p in load_fixture(name))


# -- filtering and conversion --------------------------------------------------


def filter_population_threshold(
    catalog: Iterable[Entity],
    series: PyramidSeries,
    minimum: float = MIN_POPULATION,
    reference_year: int = REFERENCE_YEAR,
    variant: str = "Medium",
) -> list[Entity]:
    """Drop countries with fewer than ``minimum`` persons in the reference year.

    Aggregates are always kept. When the population is neither on the entity
    nor derivable (percent-only pyramids) the country is kept and logged.
    """
    kept = []
    for e in catalog:
        if e.kind != "country":
            kept.append(e)
            continue
        pop = e.population_2015
        if pop is None:
            p = series.get(e.id, reference_year, variant)
            pop = None if p is None else p.total_persons
        if pop is None:
            log.warning("population of %s (%d) unknown; kept", e.name, e.id)
            kept.append(e)
        elif pop >= minimum:
            kept.append(replace(e, population_2015=pop) if e.population_2015 is None else e)
    return kept


def auto_delta(p: AgePyramid) -> float:
    """Default replacement value in percentage points.

    Half the last printed digit for 2-decimal percent tables, otherwise half
    the smallest nonzero share.
    """
    if p.unit == "percent":
        return FIXTURE_DELTA
    shares = 100.0 * p.values / p.values.sum()
    zeros = int(np.sum(shares == 0))
    delta = 0.5 * float(shares[shares > 0].min())
    # replacements may take at most half of the total
    return min(delta, 50.0 / zeros) if zeros else delta


def pyramid_to_composition(p: AgePyramid, delta: float | None = None) -> Composition:
    """Percent composition (k=100, D=21) of a pyramid; zeros replaced with ``delta``
    percentage points."""
    shares = 100.0 * p.values / p.values.sum()
    if delta is None:
        delta = auto_delta(p)
    return closure(zero_replace(shares, delta), 100.0)


def has_zeros(p: AgePyramid) -> bool:
    return bool(np.any(p.values == 0))
