"""Distances between the World 2015 column of the bundled Figure 2 table and
each country column, next to the printed values, for a range of zero
replacement values.

    python scripts/reproduce_figure2.py [--delta 0.005 0.002 ...]
"""
import argparse

from epitome.coda import aitchison_distance, euclidean_distance
from epitome.demographics import has_zeros, load_fixture, pyramid_to_composition

PRINTED = {"Colombia": 0.532, "Sri Lanka": 0.639, "Brazil": 0.900, "Thailand": 1.152, "Pakistan": 3.309}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, nargs="+", default=[0.005])
    args = ap.parse_args()

    pairs = load_fixture("figure2.csv")
    world = pairs[0][1]
    print(f"{'country':<10} {'zeros':>5} {'printed':>8} " + " ".join(f"{'d@' + str(d):>9}" for d in args.delta) + f" {'d_Euc':>7}")
    for _, p in pairs[1:]:
        dists = []
        for delta in args.delta:
            dists.append(aitchison_distance(pyramid_to_composition(p, delta), pyramid_to_composition(world, delta)))
        euc = euclidean_distance(pyramid_to_composition(p, args.delta[0]), pyramid_to_composition(world, args.delta[0]))
        print(f"{p.entity.name:<10} {str(has_zeros(p)):>5} {PRINTED[p.entity.name]:>8.3f} "
              + " ".join(f"{d:>9.3f}" for d in dists) + f" {euc:>7.3f}")


if __name__ == "__main__":
    main()
