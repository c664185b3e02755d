"""
Firms hiring in sequence: best replies and a welfare paradox
============================================================

Firms hire one after another. A firm that runs the shared algorithmic
ranking sees the SAME noisy list as every other A firm; a firm screening
on its own sees a fresh draw. Earlier hires vanish from the pool, and an
A firm additionally loses whatever earlier A firms took from the shared
list. A firm's payoff depends only on its predecessors, so greedy
slot-by-slot choices are globally optimal.
"""

import numpy as np

from monoculture import (
    CandidateDistribution,
    binary_counter_scan,
    exact_sequential_utilities,
    kfirm_braess_check,
    sequential_optimal_sequence,
)

d = CandidateDistribution.uniform(0.0, 1.0, 4)

# --- who chooses what -------------------------------------------------------
print("three firms, four uniform candidates, phi_h = 1.75 fixed")
print(f"{'phi_a':>6}  {'optimal':>8}  per-firm utilities")
for phi_a in (1.2, 1.5, 1.75, 2.0, 3.0, 8.0):
    seq = sequential_optimal_sequence(3, phi_a, 1.75, d)
    utils = "  ".join(f"{u:.4f}" for u in seq.utilities)
    print(f"{phi_a:6.2f}  {''.join(seq.choices):>8}  {utils}")
print()
print("equal-accuracy ties go to H, and H keeps winning a while past the")
print("tie: a fresh draw dodges the candidates other A firms already took.")
print("the front firm defects first, the back firm holds out longest.")
print()

# --- the binary counter -----------------------------------------------------
# Read a strategy sequence as a binary numeral, A=1. Scanning phi_a upward
# never decreases the numeral: firms migrate to A from the front, one
# pattern at a time, like incrementing a counter.
scan = binary_counter_scan(1.75, tuple(np.arange(1.05, 4.55, 0.25)), 3, d)
pattern = " ".join("".join(pt.sequence.choices) for pt in scan.points)
print("sequences along phi_a at phi_h=1.75:")
print(" ", pattern)
print("  nondecreasing as binary numerals:", scan.monotone_nondecreasing)
print()

# --- everyone optimizes, everyone loses -------------------------------------
report = kfirm_braess_check(3, 2.0, 1.75, d)
print(f"phi_a=2.0 against phi_h=1.75: A strictly dominant={report.a_strictly_dominant}")
print(f"average welfare if all run A: {report.all_a_average:.6f}")
print(f"average welfare if all run H: {report.all_h_average:.6f}")
if report.braess:
    print("individually optimal play lands on the all-A profile, yet the")
    print("all-H profile pays every firm more on average. Independent")
    print("mistakes spread the good candidates around; shared mistakes")
    print("stack the firms onto the same errors.")
print()

# the socially best arrangement is not all-A either
best = report.best_average_sequence
avg = float(np.mean(exact_sequential_utilities(best.choices, 2.0, 1.75, d)))
print(f"best average over all 8 sequences: {''.join(best.choices)} at {avg:.6f}")
