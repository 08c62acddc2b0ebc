"""How accurate is the FDTD Green's-tensor pipeline?

Two instruments, both run here at a reduced scale:

1. Vacuum sampling: the coherence of an orthogonal pair in empty space is
   exactly zero, so |rho_12| measured at random off-grid atom positions is a
   direct error readout.  Mean -> systematic, std -> random, combined in
   quadrature into the resolution's error budget.

2. Reflector benchmark: simulated |rho_12| above a PEC mirror compared with
   the closed-form curve at the grid-snapped atom height; deviations beyond
   the budget are flagged.

The paper-scale protocol (12 voxels per wavelength, 50 samples) runs via
`cohdesign validate` and takes a few minutes.
"""

from cohdesign import FdtdConfig, reflector_benchmark, vacuum_error_protocol

config = FdtdConfig(resolution=8)

print("vacuum sampling protocol (8 voxels/wavelength, 12 samples)...")
result = vacuum_error_protocol(config, n_samples=12, seed=7)
b = result.budget
print(f"  systematic {b.systematic:.2e}  random {b.random:.2e}  "
      f"total {b.total:.2e}")
print("  running total:", " ".join(f"{t:.1e}" for t in result.running_total[-4:]))

print()
print("reflector benchmark against the closed form:")
points = reflector_benchmark(
    [8], budgets={8: b}, zeta_grid=[0.5, 0.75, 1.0], base_config=config
)
for p in points:
    mark = "FLAGGED" if p.flagged else "ok"
    print(f"  zeta = {p.zeta_snapped:.3f}: fdtd {p.abs_rho_fdtd:.5f} vs "
          f"analytic {p.abs_rho_analytic:.5f}  (diff {p.difference:.1e}, {mark})")
