"""Regenerate src/epitome/data/m49_to_iso3.csv from pycountry.

UN M49 codes for countries coincide with ISO 3166-1 numeric codes, so the
table is a straight projection of the ISO registry. Run once; the output is
committed and the package never imports pycountry.

    pip install pycountry
    python scripts/build_m49_table.py
"""
import csv
from pathlib import Path

import pycountry

OUT = Path(__file__).resolve().parents[1] / "src" / "epitome" / "data" / "m49_to_iso3.csv"

def main():
    rows = []
    for c in pycountry.countries:
        name = getattr(c, "common_name", None) or c.name
        rows.append((int(c.numeric), c.alpha_3, name))
    rows.sort()
    with open(OUT, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m49", "iso3", "name"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
