"""CHSH estimation from coincidence counts and drifting-phase scans.

The analyzer has a single middle-bin output, so the superposition-basis
measurement lacks its second outcome.  A slow scan of the analyzer
phase substitutes for it: expectation values are formed between any two
points in time, the early/late counts at one time providing the
computational-basis outcomes and the middle-bin counts at two times
providing the two orientations of the superposition basis.  The maximum
over the two-time surface recovers the full correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .measurement import AnalyzerEfficiencies, bob_povm
from .quantum import DensityMatrix, IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z, tensor
from .states import embed_2x3


class ZeroDenominatorError(ValueError):
    """All four coincidence counts vanished."""


def expectation_from_counts(n_pp, n_mm, n_pm, n_mp):
    """Correlation (N++ + N-- - N+- - N-+) / (sum of all four)."""
    total = n_pp + n_mm + n_pm + n_mp
    if total <= 0:
        raise ZeroDenominatorError("coincidence counts sum to zero")
    return (n_pp + n_mm - n_pm - n_mp) / total


@dataclass
class CountTable:
    """Joint coincidence counts N_ij^{++,--,+-,-+} per setting pair (i, j)."""

    counts: dict

    def __post_init__(self):
        for key, four in self.counts.items():
            if len(four) != 4 or any(c < 0 for c in four):
                raise ValueError(f"setting {key}: need four nonnegative counts")
            if sum(four) <= 0:
                raise ValueError(f"setting {key}: all counts are zero")

    def expectation(self, i, j):
        return expectation_from_counts(*self.counts[(i, j)])


def chsh_s(e11, e12, e21, e22):
    """CHSH parameter |E(A1,B1) - E(A1,B2) + E(A2,B1) + E(A2,B2)|."""
    for e in (e11, e12, e21, e22):
        if abs(e) > 1.0 + 1e-12:
            raise ValueError(f"expectation value {e} outside [-1, 1]")
    return abs(e11 - e12 + e21 + e22)


def s_theo(v_z, v_xy):
    """Predicted CHSH parameter sqrt(2) * (v_z + v_xy) from visibilities."""
    for name, v in (("v_z", v_z), ("v_xy", v_xy)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    return math.sqrt(2.0) * (v_z + v_xy)


def combined_expectation(e1, e2):
    """Drift-invariant magnitude sqrt(e1^2 + e2^2) of two quadratures."""
    for e in (e1, e2):
        if abs(e) > 1.0 + 1e-12:
            raise ValueError(f"expectation value {e} outside [-1, 1]")
    return math.hypot(e1, e2)


@dataclass(frozen=True)
class DriftModel:
    """Analyzer phase drift phi(t).

    kind 'linear': phi = phase0 + amount * t / period (``amount`` per
    ``period`` seconds).  kind 'sinusoidal': phi = phase0 +
    amount * sin(2 pi t / period).
    """

    kind: str = "linear"
    amount: float = 2.0 * math.pi
    period: float = 120.0
    phase0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "sinusoidal"):
            raise ValueError(f"unknown drift kind {self.kind!r}")
        if self.period <= 0:
            raise ValueError(f"period must be > 0, got {self.period}")

    def phase(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            return self.phase0 + self.amount * t / self.period
        return self.phase0 + self.amount * np.sin(2.0 * math.pi * t / self.period)


def alice_setting(axis):
    """Projector pair for Alice's measurement axis.

    ``axis`` is 'z+x', 'z-x', 'x', 'y', 'z' or a Bloch 3-vector.
    """
    named = {
        "z+x": (1.0, 0.0, 1.0),
        "z-x": (-1.0, 0.0, 1.0),
        "x": (1.0, 0.0, 0.0),
        "y": (0.0, 1.0, 0.0),
        "z": (0.0, 0.0, 1.0),
    }
    if isinstance(axis, str):
        if axis not in named:
            raise ValueError(f"unknown Alice axis {axis!r}")
        axis = named[axis]
    vec = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("Bloch vector must be nonzero")
    nx, ny, nz = vec / norm
    sigma = nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z
    return 0.5 * (IDENTITY_2 + sigma), 0.5 * (IDENTITY_2 - sigma)


DETECTORS = ("+", "-")
BINS = ("early", "mid", "late")


@dataclass
class DriftTrace:
    """Coincidence series of one drift scan: the six (detector, bin) traces."""

    times: np.ndarray
    counts: dict
    drift: DriftModel
    rate: float
    bucket: float
    alice_axis: object
    eff: AnalyzerEfficiencies
    seed: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n_buckets(self):
        return self.times.size

    def middle_series(self):
        return self.counts[("+", "mid")], self.counts[("-", "mid")]


def simulate_drift_scan(
    rho: DensityMatrix,
    eff: AnalyzerEfficiencies,
    drift: DriftModel,
    alice_axis="z+x",
    rate=1000.0,
    duration=120.0,
    bucket=0.5,
    seed=None,
) -> DriftTrace:
    """Simulate the six coincidence traces while the analyzer phase drifts.

    Expected counts per bucket are rate * bucket * Tr[rho (P_a x M_bin)]
    with the middle-bin element evaluated at the drifted phase phi(t);
    the POVM's loss prefactors apportion the raw pair flux ``rate``.
    The phase is sampled at bucket start times.  With ``seed`` set, each
    trace is an independent Poisson draw from a deterministic generator;
    with ``seed=None`` the expected counts are returned (noiseless mode).
    """
    if rate <= 0 or duration <= 0 or bucket <= 0:
        raise ValueError("rate, duration and bucket must all be > 0")
    if (rho.dim_a, rho.dim_b) == (2, 2):
        rho = embed_2x3(rho, 1.0)
    if (rho.dim_a, rho.dim_b) != (2, 3):
        raise ValueError("drift scan expects a 2x2 or 2x3 state")

    n = int(round(duration / bucket))
    times = np.arange(n) * bucket
    phases = drift.phase(times)
    p_plus, p_minus = alice_setting(alice_axis)
    static = bob_povm(eff)

    lam = {(det, b): np.empty(n) for det in DETECTORS for b in BINS}
    for k, phi in enumerate(phases):
        bins = {
            "early": static["E"],
            "late": static["L"],
            "mid": bob_povm(eff, relative_phase=phi)["X"],
        }
        for det, proj in zip(DETECTORS, (p_plus, p_minus)):
            for b, op in bins.items():
                lam[(det, b)][k] = rate * bucket * rho.expectation(tensor(proj, op))

    if seed is None:
        counts = lam
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        counts = {key: rng.poisson(lam[key]).astype(float) for key in sorted(lam)}

    return DriftTrace(
        times=times,
        counts=counts,
        drift=drift,
        rate=rate,
        bucket=bucket,
        alice_axis=alice_axis,
        eff=eff,
        seed=seed,
        meta={"duration": duration, "noiseless": seed is None},
    )


class SurfaceResult(NamedTuple):
    times: np.ndarray
    surface: np.ndarray
    defined: np.ndarray
    max_abs: float
    argmax: tuple
    value_at_argmax: float


def max_expectation_surface(trace: DriftTrace) -> SurfaceResult:
    """Two-time expectation surface of the middle-bin coincidences.

    E(t1, t2) pairs the '+' orientation of the superposition basis at t1
    with the '-' orientation at t2 (where the drifted phase has moved),
    so E(t1,t2) = (N+(t1) + N-(t2) - N-(t1) - N+(t2)) / (total).  Cells
    whose four counts vanish are undefined and excluded from the argmax.
    """
    n_plus, n_minus = trace.middle_series()
    p1 = n_plus[:, None]
    m1 = n_minus[:, None]
    p2 = n_plus[None, :]
    m2 = n_minus[None, :]
    total = p1 + m2 + m1 + p2
    defined = total > 0
    surface = np.full((trace.n_buckets, trace.n_buckets), np.nan)
    np.divide(p1 + m2 - m1 - p2, total, out=surface, where=defined)
    if not np.any(defined):
        raise ZeroDenominatorError("every surface cell is undefined")
    masked = np.where(defined, np.abs(surface), -np.inf)
    flat = int(np.argmax(masked))
    argmax = np.unravel_index(flat, surface.shape)
    value = float(surface[argmax])
    return SurfaceResult(
        times=trace.times,
        surface=surface,
        defined=defined,
        max_abs=abs(value),
        argmax=(int(argmax[0]), int(argmax[1])),
        value_at_argmax=value,
    )


def z_expectation(trace: DriftTrace) -> float:
    """Computational-basis correlation from the aggregated early/late counts.

    '+' outcome of the time-bin qubit is the early bin, '-' the late bin.
    """
    n_pp = float(np.sum(trace.counts[("+", "early")]))
    n_mm = float(np.sum(trace.counts[("-", "late")]))
    n_pm = float(np.sum(trace.counts[("+", "late")]))
    n_mp = float(np.sum(trace.counts[("-", "early")]))
    return expectation_from_counts(n_pp, n_mm, n_pm, n_mp)


class ChshEstimate(NamedTuple):
    s: float
    e11: float
    e12: float
    e21: float
    e22: float
    detail: dict


def _surface_term(trace: DriftTrace, split: bool):
    """Signed middle-bin correlation extracted from the two-time surface.

    With ``split`` the argmax is selected on the even-index buckets and
    the value is re-evaluated on the adjacent odd buckets, which removes
    the selection bias of taking a maximum over noisy cells.
    """
    if not split:
        res = max_expectation_surface(trace)
        return res.value_at_argmax, {"argmax": res.argmax}
    even = _subtrace(trace, slice(0, None, 2))
    res = max_expectation_surface(even)
    i_sel, j_sel = res.argmax
    sign = 1.0 if res.value_at_argmax >= 0 else -1.0
    n = trace.n_buckets
    i = min(2 * i_sel + 1, n - 1)
    j = min(2 * j_sel + 1, n - 1)
    n_plus, n_minus = trace.middle_series()
    value = expectation_from_counts(n_plus[i], n_minus[j], n_minus[i], n_plus[j])
    return sign * value, {"argmax": (i, j), "selection_argmax": (i_sel, j_sel)}


def _subtrace(trace: DriftTrace, sel) -> DriftTrace:
    return DriftTrace(
        times=trace.times[sel],
        counts={key: trace.counts[key][sel] for key in trace.counts},
        drift=trace.drift,
        rate=trace.rate,
        bucket=trace.bucket,
        alice_axis=trace.alice_axis,
        eff=trace.eff,
        seed=trace.seed,
        meta=dict(trace.meta),
    )


def estimate_chsh(trace_a1: DriftTrace, trace_a2: DriftTrace, split=True) -> ChshEstimate:
    """CHSH parameter from one drift scan per polarization setting.

    The computational-basis correlations come from the aggregated
    early/late counts.  The superposition-basis correlation of each
    setting comes from its two-time surface; because the drift explores
    the full phase circle, the middle-bin basis orientation is a
    relabeling fixed per setting by the surface search, entering the
    CHSH combination with the sign that the scan selected.
    """
    e11 = z_expectation(trace_a1)
    e21 = z_expectation(trace_a2)
    s1, d1 = _surface_term(trace_a1, split)
    s2, d2 = _surface_term(trace_a2, split)
    e12 = -abs(s1)
    e22 = abs(s2)
    s = chsh_s(e11, e12, e21, e22)
    return ChshEstimate(s, e11, e12, e21, e22, {"surface1": d1, "surface2": d2})


def trace_to_rows(trace: DriftTrace):
    """Rows (t, six counts) for CSV export."""
    header = ["time_s"] + [f"{det}{b}" for det in DETECTORS for b in BINS]
    rows = []
    for k in range(trace.n_buckets):
        rows.append(
            [trace.times[k]]
            + [trace.counts[(det, b)][k] for det in DETECTORS for b in BINS]
        )
    return header, rows


def surface_to_rows(result: SurfaceResult):
    """Rows (t1, t2, E, defined) for CSV export."""
    header = ["t1_s", "t2_s", "expectation", "defined"]
    rows = []
    n = result.times.size
    for i in range(n):
        for j in range(n):
            ok = bool(result.defined[i, j])
            rows.append(
                [
                    result.times[i],
                    result.times[j],
                    result.surface[i, j] if ok else math.nan,
                    int(ok),
                ]
            )
    return header, rows
