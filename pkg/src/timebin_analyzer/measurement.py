"""Measurement operators for the polarization and time-bin analyzers.

Alice measures the polarization qubit with ideal projective elements in
the horizontal/vertical or diagonal/anti-diagonal basis.  Bob's time-bin
analyzer is lossy and has a single output port, so his measurement is a
POVM on the 3-dimensional space {no photon, E, L}: early-bin, late-bin
and middle-bin (superposition) detection plus a no-click element that
absorbs all losses.

The 1/4 prefactors of the analyzer elements (two balanced splittings)
are kept as printed even though they rescale all coincidence rates
uniformly; visibility ratios are insensitive to them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import min_eigenvalue


@dataclass(frozen=True)
class AnalyzerEfficiencies:
    """Transmission efficiencies of the analyzer's long and short paths."""

    eta_l: float
    eta_s: float

    def __post_init__(self):
        for name, value in (("eta_l", self.eta_l), ("eta_s", self.eta_s)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def alice_povm():
    """Projective elements {H, V, D, A} for the polarization qubit."""
    m_h = np.array([[1, 0], [0, 0]], dtype=complex)
    m_v = np.array([[0, 0], [0, 1]], dtype=complex)
    m_d = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    m_a = 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex)
    return {"H": m_h, "V": m_v, "D": m_d, "A": m_a}


def bob_povm(eff: AnalyzerEfficiencies, relative_phase=0.0):
    """Lossy time-bin POVM {E, L, X, none} in the basis {no photon, E, L}.

    The middle-bin element X interferes the early component transmitted
    through the long path with the late component through the short
    path; its early/late relative phase defaults to zero and can be set
    for sensitivity studies.
    """
    eta_l, eta_s = eff.eta_l, eff.eta_s
    cross = np.sqrt(eta_l * eta_s) * np.exp(1j * relative_phase)
    m_e = 0.25 * np.diag([0.0, eta_s, 0.0]).astype(complex)
    m_l = 0.25 * np.diag([0.0, 0.0, eta_l]).astype(complex)
    m_x = 0.25 * np.array(
        [
            [0.0, 0.0, 0.0],
            [0.0, eta_l, cross],
            [0.0, np.conj(cross), eta_s],
        ],
        dtype=complex,
    )
    m_none = np.eye(3, dtype=complex) - m_e - m_l - m_x
    return {"E": m_e, "L": m_l, "X": m_x, "none": m_none}


def ideal_bob_projectors():
    """Lossless 2-dimensional projectors {E, L, X} in the {E, L} basis."""
    m_e = np.array([[1, 0], [0, 0]], dtype=complex)
    m_l = np.array([[0, 0], [0, 1]], dtype=complex)
    m_x = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    return {"E": m_e, "L": m_l, "X": m_x}


@dataclass
class PovmDiagnostics:
    """Per-element margins from :func:`validate_povm`."""

    min_eigenvalues: dict
    below_identity_margins: dict
    completeness_residual: float
    ok: bool
    failures: list

    def __str__(self):
        if self.ok:
            return "POVM valid"
        return "POVM invalid: " + "; ".join(self.failures)


def validate_povm(elements, tol=1e-12):
    """Check positivity, boundedness by identity, and completeness.

    ``elements`` is a mapping of labels to operators.  Returns a
    :class:`PovmDiagnostics` with per-element margins; ``ok`` is False
    when any element has an eigenvalue below ``-tol``, exceeds the
    identity by more than ``tol``, or the elements do not sum to the
    identity within ``tol``.
    """
    labels = list(elements)
    dim = np.asarray(elements[labels[0]]).shape[0]
    eye = np.eye(dim, dtype=complex)

    min_eigs = {}
    below_identity = {}
    failures = []
    total = np.zeros((dim, dim), dtype=complex)
    for label in labels:
        m = np.asarray(elements[label], dtype=complex)
        lo = min_eigenvalue(m)
        hi = min_eigenvalue(eye - m)
        min_eigs[label] = lo
        below_identity[label] = hi
        if lo < -tol:
            failures.append(f"element {label} not PSD (min eigenvalue {lo:.3e})")
        if hi < -tol:
            failures.append(
                f"element {label} exceeds identity (margin {hi:.3e})"
            )
        total += m
    residual = float(np.max(np.abs(total - eye)))
    if residual > tol:
        failures.append(f"elements do not sum to identity (residual {residual:.3e})")
    return PovmDiagnostics(
        min_eigenvalues=min_eigs,
        below_identity_margins=below_identity,
        completeness_residual=residual,
        ok=not failures,
        failures=failures,
    )
