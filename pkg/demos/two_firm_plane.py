"""
Mapping two-firm equilibria over the accuracy plane
===================================================

Two firms each commit to a screening technology: A or H. Every A firm
reads the same shared ranking, H firms draw independent ones, and the
better-positioned offer wins a contested candidate. This script
classifies the stage game across a grid of accuracy pairs and prints the
result as a small text map.

Watch for the thin band just above the diagonal where the only
equilibrium is asymmetric: sharing a ranking hurts the second mover, so
at nearly equal accuracies each firm wants the technology the other one
is not using. The softmax family closes the band entirely, because its
second-mover payoff does not care which technology the rival runs.
"""

import numpy as np

from monoculture import (
    CandidatePool,
    NoiseSpec,
    RankingModelSpec,
    classify_equilibrium,
    exact_utility_table,
    sweep_plane,
)

POOL = CandidatePool((1.0, 0.5, 0.0))
LABEL_GLYPH = {"AA": "A", "HH": "h", "AH_asymmetric": "*"}

theta_h_values = [round(t, 2) for t in np.arange(0.6, 1.45, 0.2)]
theta_a_values = [round(t, 2) for t in np.arange(0.6, 1.45, 0.05)]
width = len(theta_a_values)


def print_map(title, cells):
    print(title)
    for i, th in enumerate(theta_h_values):
        row = cells[i * width : (i + 1) * width]
        line = "".join(LABEL_GLYPH.get(c.outcome.label, "?") for c in row)
        print(f"  theta_h={th:4.2f}  {line}")
    print()


# --- distance-based family ------------------------------------------------
# sweep_plane classifies every (theta_h, theta_a) cell, row-major in theta_h
family = RankingModelSpec.mallows(2.0)
print_map("distance-based family, pool (1, 0.5, 0)", sweep_plane(theta_h_values, theta_a_values, family, POOL))

# --- gaussian score noise ---------------------------------------------------
gaussian = RankingModelSpec.rum(NoiseSpec.gaussian(), 1.0)
print_map("gaussian score noise, same grid", sweep_plane(theta_h_values, theta_a_values, gaussian, POOL))

# --- softmax choice family --------------------------------------------------
# memoryless second choices: the rival's kind is payoff-irrelevant, so the
# asymmetric band cannot open (ties on the diagonal resolve toward H)
softmax = RankingModelSpec.plackett_luce(1.0)
print_map("softmax family, same grid", sweep_plane(theta_h_values, theta_a_values, softmax, POOL))

print("legend: A = both on algorithm, h = both on human, * = split")
print()

# Zoom into the gaussian band and read off the mixing weight: at a split
# equilibrium the mixed strategy makes both technologies exactly indifferent.
# Just past the band, AA becomes dominant while everyone would still be
# better off at HH; that corner is the welfare inversion the solver flags.
for theta_a in (1.02, 1.05, 1.08, 1.12):
    out = classify_equilibrium(exact_utility_table(theta_a, 1.0, gaussian, POOL))
    p = f"p={out.p:.3f}" if out.p is not None else "pure"
    flag = "  <- welfare inversion" if out.braess else ""
    print(f"theta_a={theta_a:.2f} theta_h=1.00: {out.label:14s} {p}{flag}")
