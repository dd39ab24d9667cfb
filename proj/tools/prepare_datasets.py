#!/usr/bin/env python3
"""Convert locally available UCI dataset copies into the ensbench CSV + schema format.

Source bundles (unpacked beforehand, paths passed on the command line):
  --orange  Orange3 3.3.12 sdist, directory Orange/datasets   (*.tab files)
  --keel    keel-ds 0.2.5 wheel, directory keel_ds/data/balanced/raw (*.dat files)
  --rdata   pydataset 0.2.0, directory resources/rdata/csv/MASS (biopsy.csv)

The converted files in data/ are committed; this script only documents how
they were produced.
"""

import argparse
import csv
import os
import re

MISSING = {"", "?", "~", "NA"}


def clean(token):
    token = token.strip().replace("\\ ", " ")
    if token in MISSING:
        return ""
    return re.sub(r"[^A-Za-z0-9_.+-]", "_", token)


def is_number(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def infer_schema(names, rows, forced=None):
    """Numeric columns become continuous, anything else discrete."""
    forced = forced or {}
    kinds = []
    for j, name in enumerate(names):
        cells = [r[j] for r in rows if r[j] not in MISSING]
        if forced.get(name) == "d" or not all(is_number(c) for c in cells):
            kinds.append(("discrete", sorted(set(cells), key=sort_key)))
        else:
            kinds.append(("continuous", None))
    return kinds


def sort_key(v):
    return (0, float(v), v) if is_number(v) else (1, 0.0, v)


def write(out_dir, name, feature_names, kinds, class_values, rows, labels):
    with open(os.path.join(out_dir, name + ".schema"), "w", newline="\n") as f:
        for fname, (kind, values) in zip(feature_names, kinds):
            if kind == "continuous":
                f.write(f"feature {fname} continuous\n")
            else:
                f.write(f"feature {fname} discrete {'|'.join(values)}\n")
        f.write(f"class {'|'.join(class_values)}\n")
    with open(os.path.join(out_dir, name + ".csv"), "w", newline="\n") as f:
        for row, label in zip(rows, labels):
            cells = ["?" if c in MISSING else c for c in row]
            f.write(",".join(cells + [label]) + "\n")
    print(f"{name}: {len(rows)} examples, {len(feature_names)} features, {len(class_values)} classes")


def from_orange(path, name, out_dir, drop=()):
    with open(path, encoding="utf-8") as f:
        lines = [l.rstrip("\n").split("\t") for l in f]
    header, types, flags = lines[0], lines[1], lines[2]
    width = len(header)
    flags += [""] * (width - len(flags))
    body = [(l + [""] * width)[:width] for l in lines[3:] if any(c.strip() for c in l)]
    class_col = next(j for j, fl in enumerate(flags) if "class" in fl)
    keep = [j for j in range(width)
            if j != class_col and "i" not in flags[j].split() and header[j] not in drop]
    names = [clean(header[j]) for j in keep]
    rows = [[clean(r[j]) for j in keep] for r in body]
    forced = {clean(header[j]): "d" for j in keep
              if types[j].strip() not in ("c", "continuous")}
    kinds = infer_schema(names, rows, forced)
    labels = [clean(r[class_col]) for r in body]
    class_values = sorted(set(labels), key=sort_key)
    write(out_dir, name, names, kinds, class_values, rows, labels)


def from_keel(path, name, out_dir, prefix="a"):
    with open(path, encoding="utf-8") as f:
        body = [[clean(c) for c in l.strip().split(",")]
                for l in f if l.strip() and not l.startswith("@")]
    width = len(body[0]) - 1
    names = [f"{prefix}{j + 1}" for j in range(width)]
    rows = [r[:width] for r in body]
    labels = [r[width] for r in body]
    kinds = infer_schema(names, rows)
    class_values = sorted(set(labels), key=sort_key)
    write(out_dir, name, names, kinds, class_values, rows, labels)


def from_biopsy(path, out_dir):
    names = ["clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
             "marginal_adhesion", "epithelial_cell_size", "bare_nuclei",
             "bland_chromatin", "normal_nucleoli", "mitoses"]
    with open(path, encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        body = list(reader)
    rows = [[c.strip() for c in r[2:11]] for r in body]
    labels = [r[11].strip() for r in body]
    kinds = [("continuous", None)] * len(names)
    write(out_dir, "breast-cancer-w", names, kinds, ["benign", "malignant"], rows, labels)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--orange", required=True)
    ap.add_argument("--keel", required=True)
    ap.add_argument("--rdata", required=True)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    from_biopsy(os.path.join(args.rdata, "biopsy.csv"), args.out)
    orange = lambda f: os.path.join(args.orange, f)
    from_orange(orange("iris.tab"), "iris", args.out)
    from_orange(orange("glass.tab"), "glass", args.out, drop=("Id",))
    from_orange(orange("voting.tab"), "house-votes-84", args.out)
    from_orange(orange("crx.tab"), "credit-a", args.out)
    from_orange(orange("heart_disease.tab"), "heart-cleveland", args.out)
    from_orange(orange("ionosphere.tab"), "ionosphere", args.out)
    from_orange(orange("vehicle.tab"), "vehicle", args.out)
    keel = lambda f: os.path.join(args.keel, f)
    from_keel(keel("pima.dat"), "diabetes", args.out)
    from_keel(keel("sonar.dat"), "sonar", args.out)
    from_keel(keel("german.dat"), "credit-g", args.out)
    from_keel(keel("segment.dat"), "segmentation", args.out)
    from_keel(keel("chess.dat"), "kr-vs-kp", args.out)
    from_keel(keel("letter.dat"), "letter", args.out)
    from_keel(keel("satimage.dat"), "satellite", args.out)
    from_keel(keel("splice.dat"), "splice", args.out)


if __name__ == "__main__":
    main()
