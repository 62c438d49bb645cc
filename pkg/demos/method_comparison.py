"""Walk through every solver approach on one defect.

The resonance line of a spin-1/2 center couples to shells of nuclear
spins. This script solves the same system six ways and prints the peak
statistics side by side, which makes the structure of the approximations
visible:

* the bare electron Zeeman line is infinitely sharp,
* keeping only first-order hyperfine shifts broadens it symmetrically,
* second order pushes the center up because the transverse hyperfine
  components only enter quadratically,
* collapsing tensors to their diagonal a-constants overestimates the
  width badly, and
* diagonalizing the first shell exactly barely moves the answer, which
  justifies the perturbative treatment of the outer shells.

Run as ``python demos/method_comparison.py [defect]``.
"""

import sys

import numpy as np

from defectspin import (
    SpinSystem,
    build_hamiltonian,
    build_system,
    exact_transitions,
    find_defect,
    hybrid_solve,
    load_defect_dataset,
    peak_stats,
    perturb_lines,
    shell_indices,
)

FIELD = np.array([0.0, 0.0, 42.0])      # Gauss, along the crystal c axis


def electron_only_reference(g_tensor):
    bare = SpinSystem("electron", (), g_tensor)
    h = build_hamiltonian(bare, FIELD, terms=("ezi",))
    return exact_transitions(h, bare)


def main():
    label = sys.argv[1] if len(sys.argv) > 1 else "CN0"
    system = build_system(find_defect(load_defect_dataset(), label))
    first_shell = shell_indices(system)

    runs = [
        ("EZI only", electron_only_reference(system.g_tensor)),
        ("a-constants, 2nd order",
         perturb_lines(system, FIELD, order=2, mode="a_constants")),
        ("full tensor, 2nd order", perturb_lines(system, FIELD, order=2)),
        ("full tensor, 1st order", perturb_lines(system, FIELD, order=1)),
        ("hybrid: first shell exact (HFI+NZI)",
         hybrid_solve(system, first_shell, FIELD, subset_terms=("hfi", "nzi"))),
        ("hybrid: first shell exact (HFI+NZI+NQI)",
         hybrid_solve(system, first_shell, FIELD,
                      subset_terms=("hfi", "nzi", "nqi"))),
    ]

    print(f"defect {label}, B = 42 G along c, statistics over the 30+ MHz window")
    print(f"{'approach':<42}{'FWHM (MHz)':>12}{'center (MHz)':>14}")
    for name, lines in runs:
        stats = peak_stats(lines)
        print(f"{name:<42}{stats.fwhm_gauss:>12.1f}{stats.center:>14.1f}")

    print()
    print("The hybrid rows sit within a couple of MHz of the full-tensor")
    print("second-order row: the outer shells really are perturbative, and")
    print("quadrupole terms are too small to matter at this field.")


if __name__ == "__main__":
    main()
