#!/usr/bin/env python3
"""Construct an interpolation certificate for a concrete spike pattern and
show that it stays strictly inside (-1, 1) away from the spikes.

This is the numeric (floating-point) construction: it solves the 3n x 3n
bump/wave system exactly for one support, which is how the contour figures
are made.  The rigorous certifier never looks at a single support; it bounds
all of them at once.
"""

import numpy as np

from deconv2d.schur import numeric_certificate

ZETA = 0.5
SPIKES = np.array([[0.0, 0.0], [5.0, 0.5], [1.0, 5.2], [-4.4, 2.0]])
SIGNS = np.array([1.0, -1.0, 1.0, 1.0])

cert = numeric_certificate(SPIKES, SIGNS, ZETA)

print("spike      sign    alpha       beta        gamma")
for t, tau, al, be, ga in zip(SPIKES, SIGNS, cert.alpha, cert.beta,
                              cert.gamma):
    print(f"({t[0]:5.1f},{t[1]:5.1f})  {tau:+.0f}   {al:+.6f}  "
          f"{be:+.6f}  {ga:+.6f}")

print("\ninterpolation residuals:")
print("  max |Q(t_j) - tau_j| =", float(np.max(np.abs(cert.evaluate(SPIKES)
                                                      - SIGNS))))
print("  max |grad Q(t_j)|    =", float(np.max(np.abs(cert.gradient(SPIKES)))))

xs = np.arange(-8.0, 9.0, 0.04)
G = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
dist = np.min(np.linalg.norm(G[:, None] - SPIKES[None], axis=-1), axis=1)
Q = cert.evaluate(G)
off = dist > 0.5
print(f"\non a {len(xs)}x{len(xs)} grid, max |Q| at least 0.5 away from "
      f"every spike: {float(np.max(np.abs(Q[off]))):.6f}  (< 1)")

# a coarse ASCII contour of Q along the x-axis through the first spike
print("\nQ along the x-axis:")
for x in np.arange(-2.0, 7.1, 0.5):
    q = float(cert.evaluate([x, 0.0]))
    bar = "#" * int(round(abs(q) * 30))
    print(f"  x={x:5.1f}  Q={q:+.3f}  {bar}")
