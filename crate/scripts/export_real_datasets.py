#!/usr/bin/env python3
"""Regenerate the CSV files under data/real/ from locally installed packages.

Sources:
  iris, wine, breast_cancer, digits (0/1 only) -> scikit-learn bundled datasets
  pima, haberman, bupa               -> KEEL copies shipped in the `keel-ds` wheel

Usage:
  pip download keel-ds --no-deps -d /tmp/keel
  python3 scripts/export_real_datasets.py --keel-wheel /tmp/keel/keel_ds-*.whl --out data/real
"""
import argparse
import csv
import glob
import os
import zipfile

from sklearn import datasets


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def fmt(v):
    return repr(float(v))


def export_sklearn(out):
    iris = datasets.load_iris()
    names = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
    write_csv(
        os.path.join(out, "iris.csv"),
        names + ["species"],
        ([*map(fmt, x), iris.target_names[t]] for x, t in zip(iris.data, iris.target)),
    )

    wine = datasets.load_wine()
    write_csv(
        os.path.join(out, "wine.csv"),
        [n.replace("/", "_") for n in wine.feature_names] + ["cultivar"],
        ([*map(fmt, x), str(t)] for x, t in zip(wine.data, wine.target)),
    )

    bc = datasets.load_breast_cancer()
    write_csv(
        os.path.join(out, "breast_cancer.csv"),
        [n.replace(" ", "_") for n in bc.feature_names] + ["diagnosis"],
        ([*map(fmt, x), bc.target_names[t]] for x, t in zip(bc.data, bc.target)),
    )

    digits = datasets.load_digits()
    write_csv(
        os.path.join(out, "digits.csv"),
        [f"pixel_{i}" for i in range(64)] + ["digit"],
        ([*map(fmt, x), str(t)] for x, t in zip(digits.data, digits.target) if t in (0, 1)),
    )


def read_keel(wheel, member):
    z = zipfile.ZipFile(wheel)
    text = z.read(member).decode()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([c.strip() for c in line.split(",")])
    return rows


def export_keel(wheel, out):
    pima = read_keel(wheel, "keel_ds/data/imbalanced/raw/pima.dat")
    write_csv(
        os.path.join(out, "pima.csv"),
        ["pregnancies", "glucose", "blood_pressure", "skin_thickness", "insulin", "bmi",
         "pedigree", "age", "outcome"],
        ([*map(fmt, r[:-1]), r[-1]] for r in pima),
    )
    haberman = read_keel(wheel, "keel_ds/data/imbalanced/raw/haberman.dat")
    write_csv(
        os.path.join(out, "haberman.csv"),
        ["age", "operation_year", "positive_nodes", "survival"],
        ([*map(fmt, r[:-1]), r[-1]] for r in haberman),
    )
    bupa = read_keel(wheel, "keel_ds/data/balanced/raw/bupa.dat")
    write_csv(
        os.path.join(out, "bupa.csv"),
        ["mcv", "alkphos", "sgpt", "sgot", "gammagt", "drinks", "selector"],
        ([*map(fmt, r[:-1]), r[-1]] for r in bupa),
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--keel-wheel", required=True)
    ap.add_argument("--out", default="data/real")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    export_sklearn(args.out)
    export_keel(glob.glob(args.keel_wheel)[0], args.out)


if __name__ == "__main__":
    main()
