"""Run the acceptance criteria and print one PASS/FAIL/SKIP line per criterion.

    python scripts/run_acceptance.py
    EPITOME_WPP_CSV=/path/to/WPP2015_population_by_age.csv python scripts/run_acceptance.py
"""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-rN", *sys.argv[1:]]))
