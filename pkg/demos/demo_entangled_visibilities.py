"""Hybrid polarization/time-bin entanglement under depolarizing noise.

Builds the hybrid Bell state, applies the asymmetric depolarization
channel to the time-bin qubit, and reads out the computational- and
superposition-basis entanglement visibilities with ideal and lossy
analyzers.  The predicted CHSH parameter follows directly from the two
visibilities.
"""

import numpy as np

from timebin_analyzer import chsh, states
from timebin_analyzer.measurement import AnalyzerEfficiencies, bob_povm

bell = states.hybrid_bell_state()
print("Hybrid Bell state (H paired with the early bin):")
print(np.round(bell.matrix.real, 3))

channel = states.DepolarizationParams.unbiased(p_xy=0.012, p_z=0.086)
noisy = states.depolarize(bell, channel)
grid = np.linspace(0, 2 * np.pi, 24)

v_z = states.visibility_z(noisy)
v_xy = states.visibility_xy(noisy, grid)
print(f"\nAfter depolarization (p_xy = {channel.p_x}, p_z = {channel.p_z}):")
print(f"  v_+z = {v_z.v_plus:.4f}, v_-z = {v_z.v_minus:.4f}, v_z = {v_z.v_z:.4f}")
print(f"  v_xy = {v_xy.v_xy:.4f} (fitted phase {v_xy.fitted_phase:+.3f} rad)")

print("\nLosses do not bias the visibilities (they cancel in the ratios):")
embedded = states.embed_2x3(noisy, arrival_prob=0.24)
for eta_l, eta_s in ((1.0, 1.0), (0.9, 0.9), (0.8, 0.5)):
    bob = bob_povm(AnalyzerEfficiencies(eta_l, eta_s))
    lossy = states.visibility_z(embedded, bob=bob)
    print(f"  eta_l = {eta_l}, eta_s = {eta_s}: v_z = {lossy.v_z:.4f}")

s = chsh.s_theo(v_z.v_z, v_xy.v_xy)
print(f"\nPredicted CHSH parameter sqrt(2)(v_z + v_xy) = {s:.4f}")
print("Classical bound: 2.0; quantum maximum: 2.828")
