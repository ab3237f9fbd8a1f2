"""Classify a slice of the quartic family and compare against sampled dT/dE signs.

    python demos/family_atlas.py [c]

Prints a text map over (a, b) for fixed c: one letter per case, lower case
when the finite-difference sign at half the certified energy disagrees.
"""

import collections
import sys

import numpy as np

from periodfn.period import period_derivative
from periodfn.polyfamily import FamilyParams, classify

SIGN = {"increasing": 1, "decreasing": -1, "constant": 0}


def cell(a, b, c):
    cl = classify(FamilyParams(a, b, c))
    if not cl.classified:
        return ".", cl.case
    letter = cl.case[0]
    want = SIGN[cl.verdict]
    if want and np.isfinite(cl.E0):
        d = period_derivative(cl.params.hamiltonian(), 0.5 * min(cl.E0, 1.0))
        if d.sign not in (0, want):
            letter = letter.lower()
    return letter, cl.case


def main(c):
    counts = collections.Counter()
    a_vals = np.linspace(-3, 3, 25)
    print(f"c = {c}; rows b from 3 down to -3, columns a from -3 to 3")
    for b in np.linspace(3, -3, 13):
        line = []
        for a in a_vals:
            letter, case = cell(a, b, c)
            counts[case] += 1
            line.append(letter)
        print(f"{b:+5.1f} " + "".join(line))
    print("\n" + ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())))


if __name__ == "__main__":
    main(float(sys.argv[1]) if len(sys.argv) > 1 else 1.0)
