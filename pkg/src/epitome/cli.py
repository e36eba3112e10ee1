"""Command-line entry point.

    epitome epitome    --input WPP.csv --out results/
    epitome map        --fixtures-only --world-years 2015
    epitome cluster    --input WPP.csv --clusters 7
    epitome pyramid    --fixtures-only --entity World --year 2015
    epitome trajectory --input WPP.csv --entities India,Uruguay

Exit status: 0 success, 1 data error, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import report
from .analysis import (
    SECTIONS,
    AnalysisError,
    EmptySection,
    MissingWorldPyramid,
    distance_trajectory,
    epitome_table,
    similarity_map_values,
)
from .clustering import ClusteringError, cluster_centroids, cut_tree, pairwise_distance_matrix, ward_linkage
from .coda import CodaError
from .config import ConfigError, RunConfig, load_config_file
from .demographics import (
    WORLD_ID,
    DataError,
    filter_population_threshold,
    fixture_series,
    parse_wpp_csv,
    pyramid_to_composition,
)

log = logging.getLogger("epitome")

COMMAND_FORMATS = {
    "epitome": ("csv", "json"),
    "map": ("csv", "geojson-join"),
    "cluster": ("csv", "json"),
    "pyramid": ("svg",),
    "trajectory": ("csv", "json"),
}


class UsageError(Exception):
    """Maps to exit status 2."""


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _delta(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("data and run options")
    g.add_argument("--config", type=Path, help="JSON file with run options (flags win)")
    g.add_argument("--input", type=Path, help="long-format WPP population-by-age CSV")
    g.add_argument("--fixtures-only", action="store_true", default=None, help="use the bundled 2015 fixture table")
    g.add_argument("--variant", help="projection variant to ingest (default Medium)")
    g.add_argument("--reference-year", type=int, help="year of the entity compositions (default 2015)")
    g.add_argument("--world-years", type=_int_list, help="comma list of World years")
    g.add_argument("--threshold", type=float, help="distance cut for epitome tables (default 1.0)")
    g.add_argument("--delta", type=_delta, help="zero replacement in percentage points, or 'auto'")
    g.add_argument("--min-population", type=float, help="drop countries below this 2015 population (default 90000)")
    g.add_argument("--clusters", type=int, help="number of clusters (default 7)")
    g.add_argument("--centroid-mode", choices=("geometric", "arithmetic"))
    g.add_argument("--include-aggregates", action="store_true", default=None, help="cluster regions too")
    g.add_argument("--format", dest="formats", help="comma list from csv,json,geojson-join,svg")
    g.add_argument("--out", type=Path, help="output directory (default ./out)")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="epitome", description="Age-structure similarity under the Aitchison distance.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("epitome", parents=[common], help="ranked similarity tables per World year and section")
    sub.add_parser("map", parents=[common], help="ISO3 join tables of distances for choropleths")
    sub.add_parser("cluster", parents=[common], help="Ward clustering of reference-year compositions")
    p = sub.add_parser("pyramid", parents=[common], help="SVG pyramid of one entity-year")
    p.add_argument("--entity", required=True, help="M49 id, ISO3 code or name")
    p.add_argument("--year", type=int, help="defaults to the reference year")
    t = sub.add_parser("trajectory", parents=[common], help="distance of entities to the World across years")
    t.add_argument("--entities", required=True, help="comma list of ids, ISO3 codes or names")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        cfg = cfg.merged(load_config_file(args.config))
    flags = {
        "input": args.input,
        "fixtures_only": args.fixtures_only,
        "variant": args.variant,
        "reference_year": args.reference_year,
        "world_years": args.world_years,
        "threshold": args.threshold,
        "delta": args.delta,
        "min_population": args.min_population,
        "clusters": args.clusters,
        "centroid_mode": args.centroid_mode,
        "include_aggregates": args.include_aggregates,
        "formats": args.formats.split(",") if args.formats else None,
        "out": args.out,
    }
    return cfg.merged(flags).validate()


def _formats(cfg: RunConfig, command: str) -> tuple[str, ...]:
    supported = COMMAND_FORMATS[command]
    if cfg.formats is None:
        return supported
    chosen = tuple(f for f in cfg.formats if f in supported)
    if not chosen:
        raise UsageError(f"{command} writes {supported}; none requested")
    return chosen


def load_series(cfg: RunConfig, extra_years=()):
    if cfg.fixtures_only:
        return fixture_series("figure2.csv")
    years = set(cfg.world_years) | {cfg.reference_year} | set(extra_years)
    return parse_wpp_csv(cfg.input, cfg.column_map, variant=cfg.variant, years=years)


def _analysis_entities(cfg: RunConfig, series):
    if cfg.fixtures_only:
        # percent tables carry no population counts
        return series.entities()
    return filter_population_threshold(
        series.entities(), series, cfg.min_population, cfg.reference_year, cfg.variant
    )


def cmd_epitome(cfg: RunConfig) -> list[Path]:
    series = load_series(cfg)
    entities = _analysis_entities(cfg, series)
    names = {e.id: e.name for e in entities}
    formats = _formats(cfg, "epitome")
    written = []
    for year in cfg.world_years:
        for section in SECTIONS:
            try:
                table = epitome_table(
                    series, year, section, cfg.threshold, cfg.delta, cfg.reference_year, cfg.variant, entities
                )
            except EmptySection:
                log.info("no %s entities; skipping that section", section)
                continue
            stem = cfg.out / f"epitome_{year}_{section}"
            if "csv" in formats:
                written.append(report.write_text(stem.with_suffix(".csv"), report.epitome_csv(table)))
            if "json" in formats:
                written.append(report.write_text(stem.with_suffix(".json"), report.epitome_json(table, names, cfg.delta)))
    if not written:
        raise UsageError("no entities to rank after filtering")
    return written


def cmd_map(cfg: RunConfig) -> list[Path]:
    series = load_series(cfg)
    entities = _analysis_entities(cfg, series)
    if not any(e.kind == "country" for e in entities):
        raise UsageError("no countries left after filtering")
    formats = _formats(cfg, "map")
    written = []
    for year in cfg.world_years:
        m = similarity_map_values(series, year, cfg.delta, cfg.reference_year, cfg.variant, entities)
        for e in m.unmapped:
            print(f"unmapped: {e.id} {e.name}", file=sys.stderr)
        names = {e.iso3: e.name for e in entities if e.iso3}
        if "csv" in formats:
            written.append(report.write_text(cfg.out / f"map_{year}.csv", report.map_csv(m)))
        if "geojson-join" in formats:
            written.append(report.write_text(cfg.out / f"map_{year}.geojson.json", report.map_join_json(m, names)))
    return written


def cmd_cluster(cfg: RunConfig) -> list[Path]:
    series = load_series(cfg)
    entities = _analysis_entities(cfg, series)
    kinds = {"country"} | ({"geographic_region"} if cfg.include_aggregates else set())
    pool = [e for e in entities if e.kind in kinds and e.id != WORLD_ID]
    comps = {}
    for e in pool:
        p = series.get(e.id, cfg.reference_year, cfg.variant)
        if p is not None:
            comps[e.id] = pyramid_to_composition(p, cfg.delta)
    if cfg.clusters > len(comps):
        raise UsageError(f"--clusters {cfg.clusters} exceeds the {len(comps)} available entities")
    if len(comps) < 2 and cfg.clusters == 1:
        raise UsageError("need at least 2 entities to cluster")
    by_id = {e.id: e for e in pool}
    dendrogram = ward_linkage(pairwise_distance_matrix(comps))
    assignment = cut_tree(dendrogram, cfg.clusters, comps, cfg.centroid_mode)
    centroids = cluster_centroids(assignment, comps, cfg.centroid_mode)
    formats = _formats(cfg, "cluster")
    written = []
    if "csv" in formats:
        written.append(report.write_text(cfg.out / "cluster_assignment.csv", report.assignment_csv(assignment, by_id)))
        written.append(report.write_text(cfg.out / "cluster_centroids.csv", report.centroids_csv(centroids)))
    if "json" in formats:
        names = {i: e.name for i, e in by_id.items()}
        written.append(report.write_text(cfg.out / "dendrogram.json", report.dendrogram_json(dendrogram, names)))
    return written


def cmd_pyramid(cfg: RunConfig, entity: str, year: int | None) -> list[Path]:
    year = cfg.reference_year if year is None else year
    series = load_series(cfg, extra_years=[year])
    e = series.find_entity(entity)
    if e is None:
        raise DataError(f"entity {entity!r} not in the data")
    p = series.get(e.id, year, cfg.variant)
    if p is None:
        raise DataError(f"no pyramid for {e.name} in {year}")
    _formats(cfg, "pyramid")
    return [report.write_text(cfg.out / f"pyramid_{e.id}_{year}.svg", report.pyramid_svg(p))]


def cmd_trajectory(cfg: RunConfig, entities: str) -> list[Path]:
    queries = [q.strip() for q in entities.split(",") if q.strip()]
    if not queries:
        raise UsageError("--entities is empty")
    series = load_series(cfg)
    chosen = []
    for q in queries:
        e = series.find_entity(q)
        if e is None:
            raise DataError(f"entity {q!r} not in the data")
        chosen.append(e)
    points = distance_trajectory(series, chosen, cfg.world_years, cfg.delta, cfg.reference_year, cfg.variant)
    formats = _formats(cfg, "trajectory")
    written = []
    if "csv" in formats:
        written.append(report.write_text(cfg.out / "trajectory.csv", report.trajectory_csv(points)))
    if "json" in formats:
        written.append(report.write_text(cfg.out / "trajectory.json", report.trajectory_json(points)))
    return written


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "epitome":
            written = cmd_epitome(cfg)
        elif args.command == "map":
            written = cmd_map(cfg)
        elif args.command == "cluster":
            written = cmd_cluster(cfg)
        elif args.command == "pyramid":
            written = cmd_pyramid(cfg, args.entity, args.year)
        else:
            written = cmd_trajectory(cfg, args.entities)
    except (ConfigError, UsageError) as exc:
        print(f"epitome: error: {exc}", file=sys.stderr)
        return 2
    except MissingWorldPyramid as exc:
        print(f"epitome: {exc}", file=sys.stderr)
        return 1
    except (DataError, AnalysisError, CodaError, ClusteringError, OSError) as exc:
        print(f"epitome: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
