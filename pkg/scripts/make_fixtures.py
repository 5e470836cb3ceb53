"""Regenerate the shipped synthetic volleyball fixtures (seed 0)."""

import argparse
from pathlib import Path

from geomc.datasets import make_fixtures


def main():
    default = Path(__file__).resolve().parents[1] / "src" / "geomc" / "fixtures"
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("directory", nargs="?", default=str(default))
    args = p.parse_args()
    for path in make_fixtures(args.directory):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
