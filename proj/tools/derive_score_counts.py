#!/usr/bin/env python3
"""Recover integer (tp, fp, fn) counts from rounded precision/recall/F1.

The gold total is fixed, so fn = gold - tp. Every tp whose rounded recall
matches is paired with every fp whose rounded precision and F1 match.
"""
import argparse
import sys

GOLD = 1117
ROWS = {
    "baseline": (0.7390, 0.8389, 0.7857),
    "post-processed": (0.7847, 0.8845, 0.8316),
}
EXPECTED = {"baseline": (937, 331, 180), "post-processed": (988, 271, 129)}


def solutions(p, r, f, gold):
    out = []
    for tp in range(1, gold + 1):
        if round(tp / gold, 4) != r:
            continue
        for fp in range(0, 4 * gold):
            prec = tp / (tp + fp)
            rec = tp / gold
            f1 = 2 * prec * rec / (prec + rec)
            if round(prec, 4) == p and round(f1, 4) == f:
                out.append((tp, fp, gold - tp))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gold", type=int, default=GOLD)
    ap.add_argument("--check", action="store_true", help="exit 1 unless the expected counts are the unique solution")
    args = ap.parse_args()
    ok = True
    for name, (p, r, f) in ROWS.items():
        sols = solutions(p, r, f, args.gold)
        print(f"{name}: {sols}")
        if args.check and sols != [EXPECTED[name]]:
            ok = False
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
