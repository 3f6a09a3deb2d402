#!/usr/bin/env python3
"""Fetch the four UCI evaluation datasets and prepare them as headered CSVs.

The acceptance tests and the `pk` CLI expect these files in `data/` (or in
`$PK_DATA_DIR`). Each output file puts the feature columns first and the
class column last, named `class`; missing cells keep the `?` marker, which
the loader treats as missing by default.

Usage:
    python3 scripts/fetch_uci.py                 # download into data/
    python3 scripts/fetch_uci.py --dest DIR      # download elsewhere
    python3 scripts/fetch_uci.py --from-dir DIR  # use already-downloaded
                                                 # raw .data files
"""

import argparse
import csv
import sys
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOYBEAN_FEATURES = [
    "date", "plant-stand", "precip", "temp", "hail", "crop-hist",
    "area-damaged", "severity", "seed-tmt", "germination", "plant-growth",
    "leaves", "leafspots-halo", "leafspots-marg", "leafspot-size",
    "leaf-shread", "leaf-malf", "leaf-mild", "stem", "lodging",
    "stem-cankers", "canker-lesion", "fruiting-bodies", "external-decay",
    "mycelium", "int-discolor", "sclerotia", "fruit-pods", "fruit-spots",
    "seeds", "mold-growth", "seed-discolor", "seed-size", "shriveling",
    "roots",
]

MUSHROOM_FEATURES = [
    "cap-shape", "cap-surface", "cap-color", "bruises", "odor",
    "gill-attachment", "gill-spacing", "gill-size", "gill-color",
    "stalk-shape", "stalk-root", "stalk-surface-above-ring",
    "stalk-surface-below-ring", "stalk-color-above-ring",
    "stalk-color-below-ring", "veil-type", "veil-color", "ring-number",
    "ring-type", "spore-print-color", "population", "habitat",
]

VOTING_FEATURES = [
    "handicapped-infants", "water-project-cost-sharing",
    "adoption-of-the-budget-resolution", "physician-fee-freeze",
    "el-salvador-aid", "religious-groups-in-schools",
    "anti-satellite-test-ban", "aid-to-nicaraguan-contras", "mx-missile",
    "immigration", "synfuels-corporation-cutback", "education-spending",
    "superfund-right-to-sue", "crime", "duty-free-exports",
    "export-administration-act-south-africa",
]

# The mammographic masses file also carries a BI-RADS assessment column,
# which UCI marks non-predictive; it is dropped here.
MAMMO_FEATURES = ["age", "shape", "margin", "density"]

DATASETS = {
    "soybean.csv": {
        "raw": "soybean-large.data",
        "url": f"{BASE}/soybean/soybean-large.data",
        "features": SOYBEAN_FEATURES,
        "class_position": "first",
        "drop_leading_features": 0,
        "expected_rows": 307,
    },
    "mushroom.csv": {
        "raw": "agaricus-lepiota.data",
        "url": f"{BASE}/mushroom/agaricus-lepiota.data",
        "features": MUSHROOM_FEATURES,
        "class_position": "first",
        "drop_leading_features": 0,
        "expected_rows": 8124,
    },
    "voting.csv": {
        "raw": "house-votes-84.data",
        "url": f"{BASE}/voting-records/house-votes-84.data",
        "features": VOTING_FEATURES,
        "class_position": "first",
        "drop_leading_features": 0,
        "expected_rows": 435,
    },
    "mammo.csv": {
        "raw": "mammographic_masses.data",
        "url": f"{BASE}/mammographic-masses/mammographic_masses.data",
        "features": MAMMO_FEATURES,
        "class_position": "last",
        "drop_leading_features": 1,
        "expected_rows": 961,
    },
}


def fetch(url: str) -> str:
    try:
        with urllib.request.urlopen(url, timeout=60) as resp:
            return resp.read().decode("utf-8")
    except OSError as exc:
        sys.exit(
            f"error: could not download {url}: {exc}\n"
            "If this machine has no network access, download the raw UCI "
            "files elsewhere and re-run with --from-dir, or drop prepared "
            "CSVs into data/ directly."
        )


def load_raw(cfg: dict, from_dir: Path | None) -> str:
    if from_dir is not None:
        path = from_dir / cfg["raw"]
        if not path.exists():
            sys.exit(f"error: {path} not found")
        return path.read_text(encoding="utf-8")
    return fetch(cfg["url"])


def prepare(name: str, cfg: dict, dest: Path, from_dir: Path | None) -> None:
    raw = load_raw(cfg, from_dir)
    out_path = dest / name
    n_features = len(cfg["features"]) + cfg["drop_leading_features"]
    rows = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != n_features + 1:
            sys.exit(
                f"error: {cfg['raw']} line {lineno} has {len(parts)} fields, "
                f"expected {n_features + 1}"
            )
        if cfg["class_position"] == "first":
            label, features = parts[0], parts[1:]
        else:
            label, features = parts[-1], parts[:-1]
        features = features[cfg["drop_leading_features"]:]
        rows.append(features + [label])
    if len(rows) != cfg["expected_rows"]:
        sys.exit(
            f"error: {cfg['raw']} has {len(rows)} data rows, expected "
            f"{cfg['expected_rows']}"
        )
    with out_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(cfg["features"] + ["class"])
        writer.writerows(rows)
    print(f"wrote {out_path} ({len(rows)} rows, {len(cfg['features'])} features)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--dest",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "data",
        help="output directory (default: data/ next to this repository's crates)",
    )
    parser.add_argument(
        "--from-dir",
        type=Path,
        default=None,
        help="directory holding the raw UCI .data files, skipping the download",
    )
    args = parser.parse_args()
    args.dest.mkdir(parents=True, exist_ok=True)
    for name, cfg in DATASETS.items():
        prepare(name, cfg, args.dest, args.from_dir)


if __name__ == "__main__":
    main()
