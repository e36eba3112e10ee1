"""Exit criteria. One test per criterion; the summary prints PASS/FAIL/SKIP per line.

Criteria 7 and 8 need the WPP 2015 medium-variant population-by-age table:
set EPITOME_WPP_CSV to its path (and EPITOME_WPP_CONFIG to a JSON run
config if its columns differ from the defaults). They are skipped otherwise.
"""
import filecmp
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from epitome.analysis import DEFAULT_WORLD_YEARS, epitome_table
from epitome.cli import main
from epitome.clustering import cluster_centroids, cut_tree, pairwise_distance_matrix, ward_linkage
from epitome.coda import (
    aitchison_distance,
    aitchison_distance_logratio,
    closure,
    clr,
    clr_inverse,
    perturbation,
)
from epitome.config import RunConfig, load_config_file
from epitome.demographics import filter_population_threshold, load_fixture, parse_wpp_csv, pyramid_to_composition

from synthetic import make_csv
from ward_oracle import brute_force_ward

acceptance = pytest.mark.acceptance

FIGURE2_PRINTED = {"Colombia": 0.532, "Sri Lanka": 0.639, "Brazil": 0.900, "Thailand": 1.152, "Pakistan": 3.309}

# rank-1 country (M49 code, name) and printed distance per World year
TABLE1_TOP = {
    1990: (356, "India", 0.579),
    2000: (12, "Algeria", 0.605),
    2010: (604, "Peru", 0.474),
    2015: (170, "Colombia", 0.532),
    2020: (170, "Colombia", 0.792),
    2030: (32, "Argentina", 0.544),
    2040: (554, "New Zealand", 0.494),
    2050: (858, "Uruguay", 0.419),
    2060: (630, "Puerto Rico", 0.839),
    2070: (630, "Puerto Rico", 1.293),
    2080: (392, "Japan", 1.576),
}


def random_composition(rng, D, k=1.0):
    return closure(np.exp(rng.normal(0, 2, D)), k)


# 1 ----------------------------------------------------------------------------------------


@acceptance(1, "Figure 2 rank order and distances within 0.15, < 1 s")
def test_figure2_reproduction():
    start = time.perf_counter()
    pairs = load_fixture("figure2.csv")
    comps = {p.entity.name: pyramid_to_composition(p, 0.005) for _, p in pairs}
    world = comps.pop("World")
    got = {name: aitchison_distance(c, world) for name, c in comps.items()}
    elapsed = time.perf_counter() - start
    report = ", ".join(f"{n} {got[n]:.3f} (printed {FIGURE2_PRINTED[n]:.3f})" for n in FIGURE2_PRINTED)
    assert elapsed < 1.0
    assert sorted(got, key=got.get) == list(FIGURE2_PRINTED), report
    for name, printed in FIGURE2_PRINTED.items():
        assert abs(got[name] - printed) <= 0.15, report


# 2 ----------------------------------------------------------------------------------------


@acceptance(2, "analytic distances and uniform clr")
def test_analytic_distances():
    x = closure([0.8, 0.2], 1)
    assert abs(aitchison_distance(x, closure([0.5, 0.5], 1)) - math.sqrt(2) * math.log(2)) <= 1e-12
    rng = np.random.default_rng(0)
    for D in range(2, 22):
        y = random_composition(rng, D, 100)
        assert aitchison_distance(y, y) == 0.0
        assert np.max(np.abs(clr(closure(np.ones(D), 100)).coords)) <= 1e-12


# 3 ----------------------------------------------------------------------------------------


@acceptance(3, "metric, isometry and round-trip properties on 1,000 compositions, < 10 s")
def test_property_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(2018)
    for _ in range(1000):
        D = int(rng.integers(2, 22))
        x, y, z, p = (random_composition(rng, D) for _ in range(4))
        dxy, dyz, dxz = aitchison_distance(x, y), aitchison_distance(y, z), aitchison_distance(x, z)
        assert dxy == aitchison_distance(y, x)
        assert dxz <= dxy + dyz + 1e-9
        assert abs(aitchison_distance(perturbation(p, x), perturbation(p, y)) - dxy) <= 1e-9
        x100, y100 = closure(x.parts, 100), closure(y.parts, 100)
        assert abs(aitchison_distance(x100, y100) - dxy) <= 1e-10
        back = clr_inverse(clr(x), 1)
        assert np.all(np.abs(back.parts - x.parts) <= 1e-9 * x.parts)
    assert time.perf_counter() - start < 10.0


# 4 ----------------------------------------------------------------------------------------


@acceptance(4, "clr-Euclidean and log-ratio forms agree within 1e-10 on 1,000 pairs")
def test_form_equivalence():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        D = int(rng.integers(2, 22))
        x, y = random_composition(rng, D), random_composition(rng, D, 100)
        assert abs(aitchison_distance(x, y) - aitchison_distance_logratio(x, y)) <= 1e-10


# 5 ----------------------------------------------------------------------------------------


@acceptance(5, "Ward recurrence equals brute-force ESS oracle on 200 instances, < 30 s")
def test_ward_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        D = int(rng.integers(2, 22))
        comps = {i: random_composition(rng, D) for i in range(n)}
        d = ward_linkage(pairwise_distance_matrix(comps))
        oracle = brute_force_ward(np.vstack([clr(c).coords for c in comps.values()]))
        assert np.all(np.diff(d.heights) >= 0)
        for merge, (a, b, h) in zip(d.merges, oracle):
            assert {frozenset(d.members(merge.a)), frozenset(d.members(merge.b))} == {a, b}
            assert abs(merge.height - h) <= 1e-9
    assert time.perf_counter() - start < 30.0


# 6 ----------------------------------------------------------------------------------------


@acceptance(6, "collinear 3-point linkage: second height sqrt(3) within 1e-12")
def test_three_point_linkage():
    u = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    comps = {name: clr_inverse(t * u, 1) for name, t in zip("ABC", (0.0, 1.0, 2.0))}
    d = ward_linkage(pairwise_distance_matrix(comps))
    assert (d.merges[0].a, d.merges[0].b) == (0, 1)
    assert abs(d.merges[1].height - math.sqrt(3)) <= 1e-12


# 7, 8 -------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def wpp_2015():
    path = os.environ.get("EPITOME_WPP_CSV")
    if not path:
        pytest.skip("EPITOME_WPP_CSV not set; WPP 2015 medium-variant table not available offline")
    cfg = RunConfig(input=Path(path))
    if os.environ.get("EPITOME_WPP_CONFIG"):
        cfg = cfg.merged(load_config_file(Path(os.environ["EPITOME_WPP_CONFIG"])))
    series = parse_wpp_csv(cfg.input, cfg.column_map, cfg.variant, years=set(DEFAULT_WORLD_YEARS))
    entities = filter_population_threshold(series.entities(), series, 90_000)
    return series, entities


@acceptance(7, "[integration] Table 1 rank-1 countries within 0.05; 201 countries pass the filter")
def test_table1_reproduction(wpp_2015):
    series, entities = wpp_2015
    assert sum(e.kind == "country" for e in entities) == 201
    for year, (code, name, printed) in TABLE1_TOP.items():
        top = epitome_table(series, year, "country", entities=entities).top()
        assert top is not None, year
        assert top.entity.id == code, f"{year}: got {top.entity.name}, expected {name}"
        assert abs(top.distance - printed) <= 0.05, f"{year}: {top.distance:.3f} vs {printed}"


@acceptance(8, "[integration] Figure 6: Japan with Italy, Russia apart; centroids within 0.5 pp on 90% of cells")
def test_figure6_reproduction(wpp_2015):
    series, entities = wpp_2015
    comps = {
        e.id: pyramid_to_composition(series.get(e.id, 2015))
        for e in entities
        if e.kind == "country" and series.get(e.id, 2015) is not None
    }
    dendrogram = ward_linkage(pairwise_distance_matrix(comps))
    printed = np.column_stack([p.values for _, p in load_fixture("figure6_centroids.csv")])
    best = 0
    for mode in ("geometric", "arithmetic"):
        assignment = cut_tree(dendrogram, 7, comps, mode)
        assert assignment.labels[392] == assignment.labels[380]
        assert assignment.labels[643] != assignment.labels[392]
        cents = np.column_stack([c.parts for c in cluster_centroids(assignment, comps, mode)])
        best = max(best, int(np.sum(np.abs(cents - printed) <= 0.5)))
    assert best >= 0.9 * printed.size, f"{best}/{printed.size} cells within 0.5 pp"


# 9 ----------------------------------------------------------------------------------------


@acceptance(9, "every CLI command is byte-identical across two runs")
def test_cli_determinism(tmp_path):
    wpp = tmp_path / "wpp.csv"
    wpp.write_text(make_csv())
    commands = [
        ["epitome", "--input", wpp],
        ["epitome", "--fixtures-only", "--world-years", "2015"],
        ["map", "--input", wpp],
        ["map", "--fixtures-only", "--world-years", "2015"],
        ["cluster", "--input", wpp, "--clusters", "3"],
        ["cluster", "--fixtures-only", "--clusters", "2"],
        ["pyramid", "--fixtures-only", "--entity", "World"],
        ["pyramid", "--input", wpp, "--entity", "Japan", "--year", "2050"],
        ["trajectory", "--input", wpp, "--entities", "India,Uruguay,900"],
    ]
    for i, cmd in enumerate(commands):
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{i}{run}"
            assert main([str(c) for c in cmd] + ["--out", str(out)]) == 0, cmd
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        assert names and names == sorted(p.name for p in outs[1].iterdir())
        match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
        assert not mismatch and not errors, (cmd, mismatch, errors)
