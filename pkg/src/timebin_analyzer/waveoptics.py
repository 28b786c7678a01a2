"""Scalar wave-optics model of the analyzer.

Fields are complex amplitudes sampled on a square grid with the origin
at the center.  Propagation uses the exact scalar angular-spectrum
kernel with an anti-aliasing guard; translations are spectral and exact
for band-limited fields.

The fundamental Gaussian is E(r) ~ exp(-r^2/(4 sigma^2)), i.e. ``sigma``
is the standard deviation of the intensity profile.  Two unit-power
copies offset by delta then interfere with fringe visibility
exp(-delta^2/(8 sigma^2)), which equals the ray-model envelope
exp(-delta^2/(2 sigma_g^2)) for a geometry width sigma_g = 2 sigma (see
:mod:`timebin_analyzer.geometry` for the conversion helpers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as _geometry


class GridResolutionError(ValueError):
    """Requested structure is not resolved by the grid."""


class AliasingError(ValueError):
    """Propagation distance exceeds the alias-free range of the grid."""


class ShiftTooLargeError(ValueError):
    """Translation would wrap around the periodic grid."""


@dataclass
class ScalarField:
    """Complex field on an N x N grid with physical side length ``extent``."""

    grid: np.ndarray
    extent: float
    wavelength: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=complex)
        n = self.grid.shape[0]
        if self.grid.shape != (n, n) or n < 64:
            raise ValueError(f"grid must be square with N >= 64, got {self.grid.shape}")
        if self.extent <= 0:
            raise ValueError(f"extent must be > 0, got {self.extent}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")

    @property
    def n(self) -> int:
        return self.grid.shape[0]

    @property
    def cell(self) -> float:
        return self.extent / self.n

    def coords(self):
        """Centered coordinate axis of the grid [m]."""
        return (np.arange(self.n) - self.n // 2) * self.cell

    def power(self) -> float:
        return float(np.sum(np.abs(self.grid) ** 2) * self.cell**2)

    def normalized(self) -> "ScalarField":
        p = self.power()
        if p <= 0:
            raise ValueError("cannot normalize a zero-power field")
        return ScalarField(self.grid / math.sqrt(p), self.extent, self.wavelength)


def _require_power_of_two(n):
    if n < 64 or n & (n - 1):
        raise ValueError(f"grid_n must be a power of two >= 64, got {n}")


def make_gaussian(sigma, grid_n=512, extent=None, wavelength=776e-9) -> ScalarField:
    """Unit-power fundamental Gaussian with intensity standard deviation ``sigma``.

    The default extent is 16 sigma.  The grid must resolve the beam
    (sigma at least 3 cells) and contain its tails (extent >= 12 sigma).
    """
    _require_power_of_two(grid_n)
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if extent is None:
        extent = 16.0 * sigma
    if extent < 12.0 * sigma:
        raise ValueError(f"extent {extent} must be at least 12*sigma = {12 * sigma}")
    cell = extent / grid_n
    if sigma < 3.0 * cell:
        raise GridResolutionError(
            f"sigma = {sigma} spans fewer than 3 grid cells (cell = {cell}); "
            f"increase grid_n to at least {math.ceil(3 * extent / sigma)}"
        )
    x = (np.arange(grid_n) - grid_n // 2) * cell
    xx, yy = np.meshgrid(x, x, indexing="ij")
    grid = np.exp(-(xx**2 + yy**2) / (4.0 * sigma**2)).astype(complex)
    return ScalarField(grid, extent, wavelength).normalized()


def _hermite_functions(u, order):
    """Orthonormal Hermite functions psi_0..psi_order on the axis ``u``."""
    psi = np.empty((order + 1, u.size))
    psi[0] = math.pi**-0.25 * np.exp(-0.5 * u**2)
    if order >= 1:
        psi[1] = math.sqrt(2.0) * u * psi[0]
    for m in range(1, order):
        psi[m + 1] = (
            math.sqrt(2.0 / (m + 1)) * u * psi[m]
            - math.sqrt(m / (m + 1)) * psi[m - 1]
        )
    return psi


def make_speckle(
    mode_count,
    seed,
    grid_n=512,
    extent=0.02,
    wavelength=776e-9,
    mode_width=None,
) -> ScalarField:
    """Random multimode field: a seeded Hermite-Gauss superposition.

    All transverse modes of combined order m + n < ``mode_count`` are
    superposed with independent complex-normal coefficients drawn from a
    deterministic generator, then normalized to unit power.  This is a
    reproducible surrogate for multimode-fiber output, not a fiber
    model.  ``mode_width`` is the intensity std of the fundamental mode
    and defaults to a value that fits the highest mode inside the grid.
    """
    _require_power_of_two(grid_n)
    if mode_count < 1:
        raise ValueError(f"mode_count must be >= 1, got {mode_count}")
    top = mode_count - 1  # highest 1D order present
    if mode_width is None:
        # Keep the highest mode's reach (turning point plus tail margin)
        # within a third of the extent.
        mode_width = extent / (3.0 * math.sqrt(2.0) * (math.sqrt(2 * top + 1) + 3.0))
    cell = extent / grid_n
    lobe = math.pi * math.sqrt(2.0) * mode_width / math.sqrt(2 * top + 1)
    if lobe < 3.0 * cell:
        raise GridResolutionError(
            f"highest mode lobe {lobe:.3e} m spans fewer than 3 cells "
            f"(cell = {cell:.3e}); increase grid_n or mode_width"
        )
    reach = math.sqrt(2.0) * mode_width * (math.sqrt(2 * top + 1) + 3.0)
    if 2.0 * reach > extent:
        raise GridResolutionError(
            f"highest mode reach {reach:.3e} m exceeds the half-extent "
            f"{extent / 2:.3e}; increase extent or reduce mode_width"
        )

    x = (np.arange(grid_n) - grid_n // 2) * cell
    u = x / (math.sqrt(2.0) * mode_width)
    psi = _hermite_functions(u, top) / math.sqrt(math.sqrt(2.0) * mode_width)

    rng = np.random.Generator(np.random.PCG64(seed))
    coeff = np.zeros((top + 1, top + 1), dtype=complex)
    for m in range(top + 1):
        for n_ in range(top + 1 - m):
            re, im = rng.normal(size=2)
            coeff[m, n_] = re + 1j * im
    grid = psi.T @ coeff @ psi
    return ScalarField(grid, extent, wavelength).normalized()


def _spectral_axes(field: ScalarField):
    f = np.fft.fftfreq(field.n, d=field.cell)
    return np.meshgrid(f, f, indexing="ij")


def shift_and_tilt(field: ScalarField, dx, alpha) -> ScalarField:
    """Translate the field by ``dx`` along x and add a tilt phase.

    The translation is spectral (exact for band-limited fields); the
    tilt multiplies by exp(i 2 pi sin(alpha) x / wavelength).  Shifts
    beyond a quarter extent would wrap around and are rejected.
    """
    if abs(dx) >= field.extent / 4.0:
        raise ShiftTooLargeError(
            f"|dx| = {abs(dx)} exceeds a quarter of the extent {field.extent}"
        )
    out = field.grid
    if dx != 0.0:
        fx, _ = _spectral_axes(field)
        spec = np.fft.fft2(np.fft.ifftshift(out))
        spec *= np.exp(-2j * math.pi * fx * dx)
        out = np.fft.fftshift(np.fft.ifft2(spec))
    if alpha != 0.0:
        x = field.coords()
        tilt = np.exp(2j * math.pi * math.sin(alpha) * x / field.wavelength)
        out = out * tilt[:, None]
    return ScalarField(out, field.extent, field.wavelength)


def _signal_bandwidth(field: ScalarField):
    """Radial frequency containing all but 1e-12 of the spectral power."""
    fx, fy = _spectral_axes(field)
    fr = np.hypot(fx, fy).ravel()
    p = np.abs(np.fft.fft2(np.fft.ifftshift(field.grid))).ravel() ** 2
    order = np.argsort(fr)
    cum = np.cumsum(p[order])
    total = cum[-1]
    if total <= 0:
        return 0.0
    idx = int(np.searchsorted(cum, (1.0 - 1e-12) * total))
    return float(fr[order][min(idx, fr.size - 1)])


def alias_free_range(field: ScalarField):
    """Maximum |distance| for alias-free angular-spectrum propagation."""
    f_sig = 1.1 * _signal_bandwidth(field)
    inv_lam = 1.0 / field.wavelength
    if f_sig <= 0 or f_sig >= inv_lam:
        return 0.0 if f_sig >= inv_lam else math.inf
    # Kernel phase must change by less than pi between frequency samples
    # at the field's own bandwidth: |dphi/df| * (1/L) <= pi.
    return field.extent * math.sqrt(inv_lam**2 - f_sig**2) / (2.0 * f_sig)


def propagate(field: ScalarField, distance) -> ScalarField:
    """Exact scalar angular-spectrum propagation over ``distance`` [m].

    Power is conserved for propagating components; the grids used here
    carry no evanescent content.  Raises :class:`AliasingError` with the
    required grid when the kernel would alias at the field's bandwidth.
    """
    if distance == 0.0:
        return ScalarField(field.grid.copy(), field.extent, field.wavelength)
    z_max = alias_free_range(field)
    if abs(distance) > z_max:
        factor = abs(distance) / max(z_max, 1e-300)
        raise AliasingError(
            f"|distance| = {abs(distance)} m exceeds the alias-free range "
            f"{z_max:.3g} m; enlarge the extent (and grid) by >= {factor:.2g}x "
            f"at fixed cell size, i.e. use >= {math.ceil(field.n * factor)} samples"
        )
    fx, fy = _spectral_axes(field)
    inv_lam2 = 1.0 / field.wavelength**2
    arg = inv_lam2 - fx**2 - fy**2
    kz = np.sqrt(np.maximum(arg, 0.0))
    kernel = np.exp(2j * math.pi * distance * kz)
    evanescent = arg < 0
    if np.any(evanescent):
        decay = np.exp(
            np.clip(-2.0 * math.pi * abs(distance) * np.sqrt(-arg[evanescent]), -700, 0)
        )
        kernel[evanescent] = decay
    spec = np.fft.fft2(np.fft.ifftshift(field.grid))
    out = np.fft.fftshift(np.fft.ifft2(spec * kernel))
    return ScalarField(out, field.extent, field.wavelength)


def overlap(a: ScalarField, b: ScalarField) -> complex:
    """Inner product <a|b> with the physical cell measure."""
    if a.grid.shape != b.grid.shape or a.extent != b.extent:
        raise ValueError("fields must share the same grid")
    return complex(np.sum(np.conj(a.grid) * b.grid) * a.cell**2)


def fringe_visibility(a: ScalarField, b: ScalarField) -> float:
    """Fringe visibility of two interfering fields.

    V = |<a|b>| / ((|a|^2 + |b|^2)/2); the symmetric denominator makes
    unequal arm powers reduce the visibility.
    """
    pa, pb = a.power(), b.power()
    if pa <= 0 or pb <= 0:
        raise ValueError("both fields must carry power")
    return float(abs(overlap(a, b)) / (0.5 * (pa + pb)))


def interfere(
    field: ScalarField,
    geom: "_geometry.InterferometerGeometry",
    alpha,
    relay: bool,
    relay_model: str = "identity",
) -> float:
    """Fringe visibility of the analyzer for an input field at angle ``alpha``.

    The short-arm output is the input field; without relay the long-arm
    output is additionally propagated over the extra path delta_l0 and
    laterally offset by the ray-traced delta(alpha).  With relay the
    long arm images the input identically (the round-trip ray matrix is
    the identity), so both offset and mode evolution vanish.  The common
    tilt of both output rays cancels in the overlap and the result is
    scaled by the system visibility v0.
    """
    e_short = field
    if relay:
        if relay_model == "identity":
            e_long = field
        elif relay_model == "lenses":
            e_long = _relay_by_lenses(field, geom.focal_length)
        else:
            raise ValueError(f"unknown relay_model {relay_model!r}")
    else:
        delta = _geometry.lateral_offset(geom, alpha)
        e_long = shift_and_tilt(propagate(field, geom.delta_l0), delta, 0.0)
    return geom.v0 * fringe_visibility(e_short, e_long)


def _lens(field: ScalarField, focal_length) -> ScalarField:
    x = field.coords()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    phase = np.exp(
        -1j * math.pi * (xx**2 + yy**2) / (field.wavelength * focal_length)
    )
    return ScalarField(field.grid * phase, field.extent, field.wavelength)


def _relay_by_lenses(field: ScalarField, f) -> ScalarField:
    """Lens-by-lens relay pass, twice: {FS(f) L(f) FS(2f) L(f) FS(f)}^2.

    Validation mode only; at realistic parameters the lens phase aliases
    on practical grids, so the identity model is used for production.
    """
    out = field
    for _ in range(2):
        out = propagate(out, f)
        out = _lens(out, f)
        out = propagate(out, 2.0 * f)
        out = _lens(out, f)
        out = propagate(out, f)
    return out


def aoi_visibility_scan(field, geom, alphas, relay, relay_model="identity"):
    """Visibility at each angle of a scan; convenience vector wrapper."""
    return np.array(
        [interfere(field, geom, a, relay, relay_model) for a in np.asarray(alphas)]
    )


def write_field_csv(field: ScalarField, path, kind="magnitude"):
    """Write the field magnitude or phase grid as CSV rows."""
    if kind == "magnitude":
        data = np.abs(field.grid)
    elif kind == "phase":
        data = np.angle(field.grid)
    else:
        raise ValueError(f"kind must be 'magnitude' or 'phase', got {kind!r}")
    header = (
        f"# scalar field {kind}; n={field.n} extent_m={field.extent!r} "
        f"wavelength_m={field.wavelength!r}\n"
    )
    with open(path, "w") as fh:
        fh.write(header)
        for row in data:
            fh.write(",".join(f"{v:.9e}" for v in row) + "\n")
