"""Projected coupling limits versus axion mass for the EDM and gradient presets.

For each curve the script reports the best limit, where back-action limits
the spin coherence, and how much back-action suppression would be needed to
remove that limitation entirely.
"""

import numpy as np

from spinnoise.cli import build_search
from spinnoise.config import load
from spinnoise.sensitivity import suppression_sweep


def describe(name, suppressions):
    cfg = load(name)[0]
    base = build_search(cfg)
    print(f"{name}: {base.coupling.value} coupling, masses {base.mass_grid[0]:.1e} to {base.mass_grid[-1]:.1e} eV")
    for c in suppression_sweep(base, suppressions):
        best = int(np.nanargmin(c.coupling_limit))
        n_ba = int(c.back_action_limited.sum())
        print(
            f"  suppression {c.suppression:8.1e}: best {c.coupling_limit[best]:.3e} {c.units} at {c.mass[best]:.2e} eV, "
            f"{n_ba:3d}/{c.mass.size} points back-action limited, required suppression {c.required_suppression_min:.2e}"
        )


def main():
    describe("fig4a", [1.0, 1e-2, 1e-4])
    describe("fig4b", [1.0, 1e-9])
    print()
    print("The coupling limit scales as T2*^(-1/2): suppressing back-action by 1e-4")
    print("recovers up to ~1e4 in T2* at low mass but only its square root in coupling.")


if __name__ == "__main__":
    main()
