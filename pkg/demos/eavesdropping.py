"""What decoys reveal about two eavesdroppers.

Intercept-resend disturbs a quarter of decoys, so 20 decoys catch it almost
surely. The entangling attack trades disturbance on computational decoys
against phase information gained on diagonal payload states.
"""

import numpy as np

from qaveto.adversary import Attack, detection_experiment, expected_detection

rng = np.random.default_rng(1)
for n in (4, 10, 20):
    rep = detection_experiment("run", Attack("intercept_resend"), 50_000, rng, decoys=n)
    print(f"intercept-resend, {n:2d} decoys: detected {rep.rate:.4f} (closed form {1 - 0.75**n:.4f})")

print("\n|beta|^2  detect  expected  Eve acc (Z payload)  Eve acc (X payload)")
for beta_sq in (0.0, 0.25, 0.5, 0.75, 1.0):
    a = Attack.entangle(beta_sq)
    rep = detection_experiment("decoy", a, 50_000, rng)
    d = rep.detail
    print(f"  {beta_sq:.2f}    {rep.rate:.4f}  {expected_detection(a):.4f}    "
          f"{d['accuracy_computational']:.3f}               {d['accuracy_diagonal']:.3f}")
