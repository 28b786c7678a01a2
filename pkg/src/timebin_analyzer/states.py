"""Hybrid polarization/time-bin states, noise channel, and visibilities.

The reference entangled state pairs horizontal polarization with the
early time bin, (|H,E> + |V,L>)/sqrt(2), and every construction in this
package follows that pairing.  The polarization-to-time-bin converter
implements the opposite relabeling (H -> L, V -> E); the two conventions
differ by a fixed relabeling and are intentionally not reconciled here,
so :func:`pol_to_timebin_map` is exposed as a standalone map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .measurement import alice_povm, bob_povm, ideal_bob_projectors
from .quantum import (
    DensityMatrix,
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    expectation,
    tensor,
)

# Deterministic loss of the polarizer that erases which-path information
# in the converter, and the measured end-to-end converter transmission.
POLARIZER_TRANSMISSION = 0.5
CONVERTER_THROUGHPUT = 0.24


class ZeroCoincidenceError(ValueError):
    """A coincidence denominator vanished."""


class FitDegenerateError(ValueError):
    """Sinusoidal fit is ill-posed (insufficient grid or no signal)."""


@dataclass(frozen=True)
class DepolarizationParams:
    """Pauli-channel probabilities p_x, p_y, p_z acting on one qubit."""

    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        for name, p in (("p_x", self.p_x), ("p_y", self.p_y), ("p_z", self.p_z)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.p_x + self.p_y + self.p_z > 1.0 + 1e-12:
            raise ValueError("p_x + p_y + p_z must not exceed 1")

    @classmethod
    def unbiased(cls, p_xy, p_z):
        """Channel with equal x and y flip probabilities."""
        return cls(p_x=p_xy, p_y=p_xy, p_z=p_z)


@dataclass(frozen=True)
class VisibilityPair:
    """Entanglement visibilities in the computational and superposition bases."""

    v_z: float
    v_xy: float

    def __post_init__(self):
        for name, v in (("v_z", self.v_z), ("v_xy", self.v_xy)):
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [-1, 1], got {v}")


class ZVisibilityResult(NamedTuple):
    v_plus: float
    v_minus: float
    v_z: float


class XYVisibilityResult(NamedTuple):
    v_plus: float
    v_minus: float
    v_xy: float
    fitted_phase: float


def hybrid_bell_state() -> DensityMatrix:
    """Pure state (|H,E> + |V,L>)/sqrt(2) as a 4x4 density matrix."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0 / math.sqrt(2.0)  # |H,E>
    psi[3] = 1.0 / math.sqrt(2.0)  # |V,L>
    return DensityMatrix(np.outer(psi, psi.conj()), dim_a=2, dim_b=2)


def embed_2x3(rho22: DensityMatrix, arrival_prob: float) -> DensityMatrix:
    """Embed a 2x2-qubit state into 2x3 with a no-photon dimension for Bob.

    The result is block diagonal: with probability ``arrival_prob`` the
    photon arrives and the qubit block carries the input state, otherwise
    Bob holds vacuum and Alice keeps her reduced state.
    """
    if not 0.0 <= arrival_prob <= 1.0:
        raise ValueError(f"arrival_prob must be in [0, 1], got {arrival_prob}")
    if (rho22.dim_a, rho22.dim_b) != (2, 2):
        raise ValueError("embed_2x3 expects a 2x2-qubit input state")
    out = np.zeros((6, 6), dtype=complex)
    blocks = rho22.matrix.reshape(2, 2, 2, 2)
    # Bob index mapping: qubit {E, L} -> lossy {none, E, L} positions 1, 2.
    for a in range(2):
        for a2 in range(2):
            for b in range(2):
                for b2 in range(2):
                    out[3 * a + 1 + b, 3 * a2 + 1 + b2] = arrival_prob * blocks[a, b, a2, b2]
    alice = rho22.alice_marginal()
    for a in range(2):
        for a2 in range(2):
            out[3 * a, 3 * a2] += (1.0 - arrival_prob) * alice[a, a2]
    return DensityMatrix(out, dim_a=2, dim_b=3)


def pol_to_timebin_map(pol_state):
    """Relabel a single polarization qubit to a time-bin qubit.

    Applies H -> L, V -> E to a 2x2 density matrix and returns the
    relabeled state together with the deterministic polarizer
    transmission of 0.5 that the erasure step costs.
    """
    rho = np.asarray(pol_state, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("pol_to_timebin_map expects a single-qubit state")
    u = np.array([[0, 1], [1, 0]], dtype=complex)  # |H><L| relabeling is a swap
    return u @ rho @ u.conj().T, POLARIZER_TRANSMISSION


def depolarize(
    rho: DensityMatrix, params: DepolarizationParams, on_alice=False
) -> DensityMatrix:
    """Asymmetric Pauli depolarization of the time-bin (second) qubit.

    rho_out = (1 - sum p_j) rho + sum_j p_j (1 x sigma_j) rho (1 x sigma_j).
    ``on_alice`` moves the channel to the polarization qubit instead.
    """
    if (rho.dim_a, rho.dim_b) != (2, 2):
        raise ValueError("depolarize expects a 2x2-qubit state")
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    probs = (params.p_x, params.p_y, params.p_z)
    out = (1.0 - sum(probs)) * rho.matrix
    for p, sigma in zip(probs, paulis):
        if on_alice:
            k = tensor(sigma, IDENTITY_2)
        else:
            k = tensor(IDENTITY_2, sigma)
        out = out + p * (k @ rho.matrix @ k)
    return DensityMatrix(out, dim_a=2, dim_b=2)


def _default_measurements(rho: DensityMatrix):
    alice = alice_povm()
    if rho.dim_b == 2:
        bob = ideal_bob_projectors()
    elif rho.dim_b == 3:
        from .measurement import AnalyzerEfficiencies

        bob = bob_povm(AnalyzerEfficiencies(1.0, 1.0))
    else:
        raise ValueError(f"unsupported Bob dimension {rho.dim_b}")
    return alice, bob


def visibility_z(rho: DensityMatrix, alice=None, bob=None) -> ZVisibilityResult:
    """Conditional visibilities in the computational basis and their average.

    v_plus conditions on Bob's early bin, v_minus on his late bin:
    v_plus = (N_HE - N_VE) / (N_HE + N_VE) and analogously for v_minus
    with the roles of H and V swapped.
    """
    default_alice, default_bob = _default_measurements(rho)
    alice = default_alice if alice is None else alice
    bob = default_bob if bob is None else bob

    n_he = rho.expectation(tensor(alice["H"], bob["E"]))
    n_ve = rho.expectation(tensor(alice["V"], bob["E"]))
    n_vl = rho.expectation(tensor(alice["V"], bob["L"]))
    n_hl = rho.expectation(tensor(alice["H"], bob["L"]))

    denom_plus = n_he + n_ve
    denom_minus = n_vl + n_hl
    if denom_plus <= 0 or denom_minus <= 0:
        raise ZeroCoincidenceError(
            f"coincidence denominators vanished (early {denom_plus}, late {denom_minus})"
        )
    v_plus = (n_he - n_ve) / denom_plus
    v_minus = (n_vl - n_hl) / denom_minus
    return ZVisibilityResult(v_plus, v_minus, 0.5 * (v_plus + v_minus))


def alice_phase_projectors(phi):
    """Equatorial projector pair (|H> +/- e^{i phi}|V>)/sqrt(2) outcomes."""
    sigma = math.cos(phi) * PAULI_X + math.sin(phi) * PAULI_Y
    return 0.5 * (IDENTITY_2 + sigma), 0.5 * (IDENTITY_2 - sigma)


def fit_cosine(phases, values):
    """Least-squares fit of A + B cos(phi - phi0) on a phase grid.

    The model is linear in (1, cos phi, sin phi), so the fit is closed
    form.  Returns (offset, amplitude, phi0, rms_residual).
    """
    phases = np.asarray(phases, dtype=float)
    values = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    offset, c, s = coef
    amplitude = math.hypot(c, s)
    phi0 = math.atan2(s, c)
    residual = float(np.sqrt(np.mean((design @ coef - values) ** 2)))
    return float(offset), float(amplitude), float(phi0), residual


def visibility_xy(
    rho: DensityMatrix, phase_grid, bob_x=None, alice=None
) -> XYVisibilityResult:
    """Superposition-basis visibility from a scan of Alice's phase.

    Coincidence rates with Bob's middle-bin element are evaluated on the
    phase grid, fitted with A + B cos(phi - phi0), and the visibility is
    |B|/A per output branch; the average and the fitted phase of the
    plus branch are also returned.  The grid must span at least 2*pi
    with at least 8 points.
    """
    phases = np.asarray(phase_grid, dtype=float)
    if phases.size < 8 or phases.max() - phases.min() < 2.0 * math.pi - 1e-9:
        raise FitDegenerateError(
            "phase grid must span at least 2*pi with at least 8 points"
        )
    if bob_x is None:
        _, default_bob = _default_measurements(rho)
        bob_x = default_bob["X"]

    rate_plus = np.empty(phases.size)
    rate_minus = np.empty(phases.size)
    for k, phi in enumerate(phases):
        p_plus, p_minus = alice_phase_projectors(phi)
        if alice is not None:
            p_plus, p_minus = alice(phi)
        rate_plus[k] = rho.expectation(tensor(p_plus, bob_x))
        rate_minus[k] = rho.expectation(tensor(p_minus, bob_x))

    a_plus, b_plus, phi0, _ = fit_cosine(phases, rate_plus)
    a_minus, b_minus, _, _ = fit_cosine(phases, rate_minus)
    if a_plus <= 0 or a_minus <= 0:
        raise FitDegenerateError("fitted offset is not positive")
    v_plus = b_plus / a_plus
    v_minus = b_minus / a_minus
    return XYVisibilityResult(v_plus, v_minus, 0.5 * (v_plus + v_minus), phi0)
