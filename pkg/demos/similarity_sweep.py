"""Sweeping a holomorphic parameter and probing the regularity of delta.

The three maps z -> (z - p + p*lambda) / lambda, one per vertex p of a
centered unit triangle, have inverse branches that scale by |lambda|
toward the vertices.  For |lambda| < 1/2 the attractor is a self-similar
Cantor-type set and the Bowen parameter has the closed form
log 3 / log(1/|lambda|), which depends on lambda only through |lambda|.

That closed form is smooth in lambda and satisfies the sub-mean-value
inequality on discs, and its reciprocal is harmonic in lambda.  The
sweep below estimates delta on a small parameter grid and runs the two
built-in diagnostics: ring averages against the sub-mean inequality,
and polynomial fits along grid lines whose residuals are compared with
the estimator's own error scale.  Neither diagnostic proves anything;
they are falsifiers that would flag a jump, kink, or bump in the data.

Run from the repo root (about a minute):

    python3 demos/similarity_sweep.py

The CLI variant writes the same table to CSV:

    ratsemi sweep --config demos/configs/similarity_sweep.json --out sweep.csv
"""
import math

from ratsemi import (
    GridSpec,
    ThermoConfig,
    similarity_family,
    smoothness_diagnostic,
    submean_diagnostic,
    sweep_delta,
)

SIDE_HEIGHT = 0.5 * math.sqrt(3.0)
CENTROID = 0.5 + 1j * SIDE_HEIGHT / 3.0
VERTICES = tuple(p - CENTROID for p in (0.0, 1.0, 0.5 + 1j * SIDE_HEIGHT))


def main():
    fam = similarity_family(VERTICES)
    # equal re/im spacing: the ring diagnostic assumes isotropic steps
    grid = GridSpec(0.25, 0.43, 9, -0.09, 0.09, 9)
    print(f"sweeping a {grid.re_n} x {grid.im_n} grid,"
          f" re(lambda) in [{grid.re_min}, {grid.re_max}],"
          f" im(lambda) in [{grid.im_min}, {grid.im_max}]")
    table = sweep_delta(fam, grid, ThermoConfig(depth=9))

    ok = [row for row in table.rows if row.status == "ok"]
    gaps = [abs(row.delta - math.log(3.0) / math.log(1.0 / abs(row.lam)))
            for row in ok]
    print(f"{len(ok)}/{len(table.rows)} points converged;"
          f" worst gap to log3/log(1/|lambda|): {max(gaps):.2e}")

    print()
    print("== sub-mean-value diagnostic (ring averages) ==")
    sub = submean_diagnostic(table, radius=1)
    print(f"verdict: {sub.verdict}   ({sub.centers_checked} interior centers,"
          f" tolerance {sub.tol_sub:.2e})")
    print(f"worst delta violation:      {sub.worst_violation:+.2e}"
          f" at {sub.worst_at}")
    print(f"worst reciprocal violation: {sub.worst_reciprocal_violation:+.2e}"
          f" at {sub.worst_reciprocal_at}")
    print("negative numbers mean the inequality held with room to spare.")

    print()
    print("== smoothness diagnostic (line fits) ==")
    mid = grid.im_n // 2
    smooth = smoothness_diagnostic(table, ("col", mid), fit_degree=4)
    print(f"quartic fit along the central horizontal line:"
          f" max residual {smooth.max_residual:.2e}"
          f" vs error scale {smooth.error_scale:.2e}"
          f" (ratio {smooth.residual_ratio:.2f})")
    if smooth.min_psh_indicator is not None:
        print(f"grid-wide indicator delta*lap(delta) - 2|grad(delta)|^2:"
              f" min {smooth.min_psh_indicator:+.3e}"
              f" (finite-difference noise {smooth.psh_noise:.1e})")
        print("values near zero match the radial closed form, whose")
        print("reciprocal is harmonic in lambda.")


if __name__ == "__main__":
    main()
