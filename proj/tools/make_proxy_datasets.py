#!/usr/bin/env python3
"""Build PROBEN1-format stand-ins for cancer1 and diabetes1.

The original PROBEN1 archive is not redistributed here. This script rebuilds
equivalent files from the UCI-derived copies shipped with R's MASS package
(as bundled by the `pydataset` PyPI package):

  biopsy.csv           -> cancer1.dt   (699 rows, 9 inputs, 2 classes)
  Pima.tr.csv + .te    -> diabetes1.dt (532 complete rows, 7 inputs, 2 classes)

Inputs are scaled to [0, 1] and the rows are shuffled with a fixed seed, the
same preparation PROBEN1 applies to its own files.

usage: make_proxy_datasets.py <MASS csv dir> <output dir>
"""
import csv
import random
import sys
from pathlib import Path


def write_proben1(path, rows, num_inputs, num_classes):
    total = len(rows)
    train = total // 2
    valid = total // 4
    # remainder rows go to training first, then validation
    rest = total - train - valid - total // 4
    train += min(rest, 1)
    valid += max(rest - 1, 0)
    test = total - train - valid
    with open(path, "w") as f:
        f.write("bool_in=0\n")
        f.write(f"real_in={num_inputs}\n")
        f.write(f"bool_out={num_classes}\n")
        f.write("real_out=0\n")
        f.write(f"training_examples={train}\n")
        f.write(f"validation_examples={valid}\n")
        f.write(f"test_examples={test}\n")
        for inputs, label in rows:
            outs = ["1" if k == label else "0" for k in range(num_classes)]
            f.write(" ".join(f"{x:.6g}" for x in inputs) + " " + " ".join(outs) + "\n")


def read_csv(path):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        return header, list(reader)


def cancer(src):
    _, rows = read_csv(src / "biopsy.csv")
    features = []
    labels = []
    for r in rows:
        features.append([None if v == "NA" else float(v) for v in r[2:11]])
        labels.append(0 if r[11] == "benign" else 1)
    # the only gaps are in bare nuclei; fill with the column mean
    for col in range(9):
        present = [x[col] for x in features if x[col] is not None]
        mean = sum(present) / len(present)
        for x in features:
            if x[col] is None:
                x[col] = mean
    data = [([v / 10.0 for v in x], y) for x, y in zip(features, labels)]
    random.Random(1).shuffle(data)
    return data, 9


def diabetes(src):
    rows = []
    for name in ("Pima.tr.csv", "Pima.te.csv"):
        _, part = read_csv(src / name)
        rows.extend(part)
    features = [[float(v) for v in r[1:8]] for r in rows]
    labels = [1 if r[8] == "Yes" else 0 for r in rows]
    lo = [min(x[c] for x in features) for c in range(7)]
    hi = [max(x[c] for x in features) for c in range(7)]
    data = [([(v - lo[c]) / (hi[c] - lo[c]) for c, v in enumerate(x)], y)
            for x, y in zip(features, labels)]
    random.Random(1).shuffle(data)
    return data, 7


def main():
    src = Path(sys.argv[1])
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    data, n = cancer(src)
    write_proben1(out / "cancer1.dt", data, n, 2)
    data, n = diabetes(src)
    write_proben1(out / "diabetes1.dt", data, n, 2)


if __name__ == "__main__":
    main()
