"""Long-term phase stability via the drift-invariant combined expectation.

The passively stabilized analyzer phase wanders slowly.  Measuring the
superposition basis at two quadratures of the polarization qubit gives
E1 = v cos(phi) and E2 = v sin(phi); their quadrature sum recovers the
visibility no matter where the phase drifts, so the entanglement metric
stays flat for half an hour of simulated drift.
"""

import math

from timebin_analyzer import analysis, chsh

drift = chsh.DriftModel("linear", amount=math.pi / 2, period=1800.0, phase0=0.3)

print("Noiseless half-hour run, 3-minute buckets, pi/2 of total drift:")
curve = analysis.stability_series(0.804, drift, duration=1800.0, bucket=180.0)
print(f"{'t [min]':>8} {'E_phi':>8} {'E_quad':>8} {'combined':>9}")
for t, e1, e2, comb in curve.rows:
    print(f"{t / 60:8.1f} {e1:8.4f} {e2:8.4f} {comb:9.4f}")

noisy = analysis.stability_series(
    0.804, drift, duration=1800.0, bucket=180.0, rate=1000.0, seed=11
)
worst = min(noisy.rows[:, 3])
print(f"\nWith Poisson noise at 1000 coincidences/s the combined value dips to "
      f"{worst:.3f},")
print("still comfortably above the 0.65 needed to certify entanglement at "
      "v_z = 0.952")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    t_min = noisy.rows[:, 0] / 60.0
    ax.plot(t_min, noisy.rows[:, 1], "rs-", label="E at phi'")
    ax.plot(t_min, noisy.rows[:, 2], "bh-", label="E at phi' + pi/2")
    ax.plot(t_min, noisy.rows[:, 3], "ko-", label="combined")
    ax.axhline(0.65, color="gray", ls=":", label="certification floor")
    ax.set_xlabel("time [min]")
    ax.set_ylabel("expectation value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig("demo_long_term_stability.png", dpi=150)
    print("\nsaved demo_long_term_stability.png")
