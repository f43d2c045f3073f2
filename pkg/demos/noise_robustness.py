"""Average fidelity under amplitude and phase damping.

Regenerates the curve data for the key-based, Bell-based and ring schemes
and shows that amplitude damping costs more fidelity at every eta.
"""

from qaveto.analysis import NoiseSweep, eta_grid, noise_sweep

grid = eta_grid(0.0, 0.9, 0.15)
for protocol in ("qav1", "qav2", "qav6", "qav7"):
    ad = noise_sweep(NoiseSweep(protocol, "amplitude", grid))
    pd = noise_sweep(NoiseSweep(protocol, "phase", grid))
    print(f"\n{protocol}   eta    F_AD      F_PD      max|numeric-formula|")
    for a, p in zip(ad, pd):
        diff = max(a.abs_diff, p.abs_diff)
        print(f"        {a.eta:.2f}  {a.numeric:.6f}  {p.numeric:.6f}  {diff:.1e}")
