#!/usr/bin/env python3
"""Compare run reports against expected scores with a +/-2 point band.

usage: check_expected.py EXPECTED.tsv REPORT.json...
Exit status 1 if any covered cell falls outside the band.
"""
import csv
import json
import sys

BAND = 2.0


def main(argv):
    if len(argv) < 3:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    expected = {}
    with open(argv[1], newline="") as f:
        for row in csv.DictReader(f, delimiter="\t"):
            metric = row.get("p_at_1") or row.get("accuracy")
            expected[(f"{row['method']}/{row['embeddings']}", row["pair"])] = float(metric)

    outside = 0
    print("row\tpair\tgot\texpected\tdelta\tstatus")
    for path in argv[2:]:
        with open(path) as f:
            report = json.load(f)
        key = (report["row_label"], report["pair_label"])
        if key not in expected:
            continue
        got = 100.0 * report["value"]
        want = expected[key]
        delta = got - want
        ok = abs(delta) <= BAND
        outside += not ok
        print(f"{key[0]}\t{key[1]}\t{got:.1f}\t{want:.1f}\t{delta:+.1f}\t{'ok' if ok else 'OUTSIDE'}")
    return 1 if outside else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
