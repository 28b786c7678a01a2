"""Why the analyzer needs relay optics: the ABCD identity and phase slopes.

The relay lens system has a round-trip ray-transfer matrix equal to the
identity, so the long arm leaves the transverse mode untouched.  The
same ray model also shows how violently the interferometer phase reacts
to the input angle when the relay is absent.
"""

import math

import numpy as np

from timebin_analyzer import geometry

print("Relay ray-transfer matrices")
for f in (0.05, 0.1, 1.0):
    single = geometry.relay_single_pass(f)
    round_trip = geometry.relay_matrix(f)
    print(f"  f = {f:5.2f} m: single pass diag = ({single[0, 0]:+.0f}, {single[1, 1]:+.0f}), "
          f"round-trip identity residual = {np.max(np.abs(round_trip - np.eye(2))):.2e}")

geom = geometry.InterferometerGeometry(
    delta_l0=0.60, sigma=1.49e-3, v0=0.91, wavelength=776e-9, focal_length=0.1
)

print("\nPath difference and lateral offset versus angle")
print(f"{'alpha':>12} {'path diff [m]':>15} {'offset [mm]':>12} {'visibility':>11}")
for alpha in (0.0, 100e-6, 500e-6, 1.0e-3, 1.7e-3):
    print(
        f"{alpha * 1e3:9.3f} mrad {geometry.path_difference(geom, alpha):15.9f} "
        f"{geometry.lateral_offset(geom, alpha) * 1e3:12.4f} "
        f"{geometry.visibility(geom, alpha):11.4f}"
    )

step = 1e-9
slope = (
    geometry.path_difference(geom, step) - geometry.path_difference(geom, -step)
) / (2 * step)
aoi_per_pi = geom.wavelength / (2 * abs(slope))
print(f"\nPath-difference slope at normal incidence: {slope:.3f} m/rad")
print(f"A pi phase shift needs only {aoi_per_pi * 1e9:.1f} nrad of input tilt")

base = geometry.phase(geom, 0.0).unwrapped
shift = abs(geometry.phase(geom, 1.75e-6).unwrapped - base)
print(f"Tilting by 1.75 urad moves the phase by {shift / math.pi:.2f} pi:")
print("without relay correction the superposition-basis signal is unusable")
