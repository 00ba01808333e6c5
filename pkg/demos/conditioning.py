#!/usr/bin/env python3
"""Why separation matters: conditioning of the measurement matrix.

An 8x8 lattice of candidate spikes at spacing Delta' is observed through a
Gaussian kernel on a sample grid.  As Delta' shrinks past the kernel width
the smallest singular value of the measurement matrix collapses by orders
of magnitude -- below that scale, even noiseless recovery is numerically
hopeless no matter the algorithm.  The sample spacing, by contrast, barely
matters.
"""

from deconv2d.experiments import svd_conditioning

print("spike spacing sweep (sample spacing 0.5):")
print("  Delta'   sigma_min     sigma_med    ")
for dp, z, smin, smed in svd_conditioning([2.0, 1.5, 1.0, 0.75, 0.5], [0.5]):
    print(f"  {dp:5.2f}   {smin:11.4e}  {smed:11.4e}")

print("\nsample spacing sweep (spike spacing 1.5):")
print("  zeta     sigma_min     sigma_med    ")
for dp, z, smin, smed in svd_conditioning([1.5], [0.25, 0.5, 0.75, 1.0]):
    print(f"  {z:5.2f}   {smin:11.4e}  {smed:11.4e}")

print("\nthe transition sits near Delta' = 1 (one kernel width): spacing")
print("0.5 costs ~6 orders of magnitude in sigma_min versus spacing 2.")
