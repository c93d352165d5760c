#!/usr/bin/env python3
"""Convert public copies of the Wine and Ionosphere datasets to the CSV
layout the CLI and acceptance suite read: numeric feature columns followed
by a 0/1 `label` column (1 = anomaly).

Wine: classes 1 and 2 are inliers; 10 rows of class 0, drawn with a fixed
seed, are the outliers (129 rows). The input is scikit-learn's
`wine_data.csv` (first line is a metadata header).

Ionosphere: class `b` is the outlier class (126 of 351 rows). The constant
second attribute is dropped, leaving 33 features. The input is either
Orange's tab-separated `ionosphere.tab` or the UCI `ionosphere.data` file.
"""

import argparse
import csv
import random
from pathlib import Path


def default_wine_source():
    try:
        import sklearn
    except ImportError:
        return None
    return Path(sklearn.__file__).parent / "datasets" / "data" / "wine_data.csv"


def convert_wine(src, dst, seed):
    with open(src, newline="") as f:
        rows = list(csv.reader(f))[1:]
    inliers = [r[:-1] for r in rows if r[-1] in ("1", "2")]
    class0 = [r[:-1] for r in rows if r[-1] == "0"]
    outliers = random.Random(seed).sample(class0, 10)
    write(dst, [(r, 0) for r in inliers] + [(r, 1) for r in outliers])


def convert_ionosphere(src, dst):
    text = Path(src).read_text().splitlines()
    if "\t" in text[0]:
        # Orange format: names, types, flags, then data
        rows = [line.split("\t") for line in text[3:] if line.strip()]
    else:
        rows = [line.split(",") for line in text if line.strip()]
    out = []
    for r in rows:
        features = [v.strip() for v in r[:-1]]
        del features[1]
        out.append((features, 1 if r[-1].strip() == "b" else 0))
    write(dst, out)


def write(dst, rows):
    d = len(rows[0][0])
    with open(dst, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(d)] + ["label"])
        for features, label in rows:
            w.writerow(features + [label])
    print(f"{dst}: {len(rows)} rows, {d} features, {sum(l for _, l in rows)} anomalies")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--wine", type=Path, default=default_wine_source())
    p.add_argument("--ionosphere", type=Path)
    p.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    if args.wine and args.wine.exists():
        convert_wine(args.wine, args.out / "wine.csv", args.seed)
    else:
        print("wine source not found; skipped")
    if args.ionosphere:
        convert_ionosphere(args.ionosphere, args.out / "ionosphere.csv")
    else:
        print("no --ionosphere source given; skipped")


if __name__ == "__main__":
    main()
