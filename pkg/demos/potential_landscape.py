"""Walk the flux-biased potential landscape of the detector loop.

Sweeps the external flux across the principal range, reporting how many
wells exist, where the well count bifurcates, and how the shallow-well
plasma frequency tunes with bias.  Run with no arguments; prints tables
to stdout.
"""

from __future__ import annotations

import math

import numpy as np

from jpmsim.potential import (
    DEFAULT_PARAMS,
    PHI0,
    FluxBias,
    beta_L,
    critical_flux,
    find_extrema,
    well_report,
)


def main() -> None:
    p = DEFAULT_PARAMS
    beta = beta_L(p)
    crit = critical_flux(p)
    print(f"screening parameter beta_L = {beta:.4f}")
    print(
        "bistable window: "
        + " .. ".join(f"{f / PHI0:.6f} Phi0" for f in crit)
        + " (well count changes by one at each edge)"
    )
    print()

    print("flux (Phi0)   wells   shallow dU (K)   shallow wp/2pi (GHz)   levels")
    k_b = 1.380649e-23
    for frac in np.linspace(0.0, 1.0, 21):
        reports = well_report(FluxBias(frac * PHI0), p)
        n_min = sum(1 for _, kind in find_extrema(FluxBias(frac * PHI0), p) if kind == "minimum")
        shallow = min(reports, key=lambda w: w.barrier_height)
        depth = "unbounded" if math.isinf(shallow.barrier_height) else f"{shallow.barrier_height / k_b:9.3f}"
        levels = "-" if math.isinf(shallow.level_count) else f"{shallow.level_count:6.1f}"
        print(
            f"  {frac:8.3f}   {n_min:5d}   {depth:>14s}   "
            f"{shallow.plasma_frequency / (2e9 * math.pi):20.4f}   {levels:>6s}"
        )

    # Near the upper tangency the shallow well flattens out and its
    # plasma frequency collapses; this is the operating knob for photon
    # detection.
    print()
    print("approach to the upper tangency:")
    for offset in (1e-2, 1e-3, 1e-4, 1e-5):
        flux = FluxBias(crit[1] - offset * PHI0)
        shallow = min(well_report(flux, p), key=lambda w: w.barrier_height)
        print(
            f"  crit - {offset:7.0e} Phi0: wp/2pi = "
            f"{shallow.plasma_frequency / (2e9 * math.pi):7.4f} GHz, "
            f"levels = {shallow.level_count:6.2f}"
        )


if __name__ == "__main__":
    main()
