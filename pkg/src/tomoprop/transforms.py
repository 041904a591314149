"""Transforms between density matrices, Wigner functions and optical tomograms.

The optical tomogram w(X, theta) is the distribution of the rotated quadrature
X = q cos(theta) + p sin(theta).  Rows outside [0, pi) are reached through the
twisted extension w(X, theta + pi) = w(-X, theta), which every sampler here
applies automatically.

Conventions: hbar = 1, Wigner functions normalized to integrate to 2*pi over
phase space, tomogram rows normalized to 1 in X.
"""

import numpy as np
from dataclasses import dataclass, field
from scipy.fft import next_fast_len
from scipy.ndimage import map_coordinates, spline_filter
from scipy.signal import czt

from .errors import DegenerateError, GridError, SingularityError, SupportError
from .grids import CoordinateGrid, TomogramGrid
from .states import DensityMatrix

# Interpolation step (in either phase-space direction) that keeps cubic-spline
# sampling errors comfortably below the 1e-5 transform accuracy target.
SAMPLING_STEP = 0.04

# Step of the auxiliary quadrature along rotated lines.
LINE_STEP = 0.15

# Relative magnitude below which a row/column of W counts as empty.  The
# u-transform leaks a slowly decaying ~1e-11 tail into far momentum columns
# wherever anti-diagonals hit the data-window corners; the threshold sits
# above that floor so noise never counts as support, yet the mass it can
# drop (< 1e-9 of any integral) stays far below every transform tolerance.
LIVE_REL_TOL = 1e-10

# Relative magnitude of W at the grid boundary above which a line-integral
# transform refuses to run (mass would be truncated).
BOUNDARY_REL_TOL = 1e-4

# Absolute tomogram magnitude at the X edge above which inversion refuses.
EDGE_MASS_TOL = 1e-8


@dataclass
class Tomogram:
    """Optical tomogram sampled on a TomogramGrid, rows indexed by theta."""

    grid: TomogramGrid
    values: np.ndarray

    def row_norms(self):
        return self.values @ self.grid.x_trapezoid_weights

    def validate(self, neg_tol=1e-6, norm_tol=1e-3):
        if self.values.shape != (self.grid.n_theta, self.grid.n_x):
            raise GridError(
                f"tomogram shape {self.values.shape} does not match grid "
                f"({self.grid.n_theta}, {self.grid.n_x})"
            )
        vmin = float(self.values.min())
        if vmin < -neg_tol:
            raise SupportError(f"tomogram attains {vmin:.3e}, below -{neg_tol:.1e}")
        norms = self.row_norms()
        worst = float(np.abs(norms - 1.0).max())
        if worst > norm_tol:
            raise SupportError(f"row normalization deviates by {worst:.3e} > {norm_tol:.1e}")
        return self

    def sample_twisted(self, X, theta, interp="linear"):
        """Evaluate the tomogram at arbitrary (X, theta) with theta on the
        whole real line, using the twisted periodic extension.

        X outside the grid evaluates to 0.  interp is "linear" (default,
        positivity preserving) or "cubic".
        """
        X = np.asarray(X, dtype=float)
        theta = np.asarray(theta, dtype=float)
        X, theta = np.broadcast_arrays(X, theta)

        k = np.floor(theta / np.pi)
        theta_loc = theta - k * np.pi
        sign = np.where(np.mod(k, 2.0) == 0.0, 1.0, -1.0)
        Xe = sign * X

        if interp == "linear":
            order, g = 1, 1
        elif interp == "cubic":
            order, g = 3, 4
        else:
            raise ValueError(f"unknown interpolation {interp!r}")

        n_t = self.grid.n_theta
        top = np.flip(self.values[n_t - g:], axis=1)
        bottom = np.flip(self.values[:g], axis=1)
        ext = np.concatenate([top, self.values, bottom], axis=0)
        if order == 3:
            ext = spline_filter(ext, order=3)

        row = theta_loc / self.grid.theta_spacing - 0.5 + g
        col = (Xe + self.grid.x_max) / self.grid.x_spacing
        out = map_coordinates(
            ext,
            np.array([row.ravel(), col.ravel()]),
            order=order,
            prefilter=False,
            mode="constant",
            cval=0.0,
        )
        return out.reshape(X.shape)


@dataclass
class WignerFunction:
    """Wigner function on a uniform (q, p) product grid.

    The axes need not be conjugate; inverse_radon produces caller-chosen axes
    while wigner_from_density produces the FFT-conjugate momentum axis.
    """

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name, ax in (("q_axis", self.q_axis), ("p_axis", self.p_axis)):
            ax = np.asarray(ax, dtype=float)
            if ax.ndim != 1 or ax.size < 8:
                raise GridError(f"{name} must be a 1-d axis with at least 8 points")
            d = np.diff(ax)
            if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
                raise GridError(f"{name} must be uniform")
        if self.values.shape != (self.q_axis.size, self.p_axis.size):
            raise GridError(
                f"Wigner array shape {self.values.shape} does not match axes "
                f"({self.q_axis.size}, {self.p_axis.size})"
            )

    @property
    def q_spacing(self):
        return float(self.q_axis[1] - self.q_axis[0])

    @property
    def p_spacing(self):
        return float(self.p_axis[1] - self.p_axis[0])

    def mass(self):
        """Phase-space integral divided by 2*pi (should be 1)."""
        wq = np.full(self.q_axis.size, self.q_spacing)
        wq[0] *= 0.5
        wq[-1] *= 0.5
        wp = np.full(self.p_axis.size, self.p_spacing)
        wp[0] *= 0.5
        wp[-1] *= 0.5
        return float(wq @ self.values @ wp) / (2.0 * np.pi)

    def validate(self, mass_tol=1e-3):
        m = self.mass()
        if abs(m - 1.0) > mass_tol:
            raise SupportError(f"Wigner mass {m} deviates from 1 by more than {mass_tol:.1e}")
        return self


def _fourier_refine(values, axis, factor):
    """Trigonometric refinement of uniformly sampled data along one axis.

    The samples are treated as one period; for data that decays to zero at
    both ends this is spectrally accurate interpolation.  Returns the refined
    array restricted to the span of the original samples, i.e. length
    (n - 1) * factor + 1 along the refined axis.
    """
    if factor <= 1:
        return values
    x = np.moveaxis(values, axis, -1)
    n = x.shape[-1]
    m = n * factor
    spec = np.fft.fft(x, axis=-1)
    pad = np.zeros(x.shape[:-1] + (m,), dtype=complex)
    h = n // 2
    if n % 2 == 0:
        pad[..., :h] = spec[..., :h]
        pad[..., h] = 0.5 * spec[..., h]
        pad[..., m - h] = 0.5 * spec[..., h]
        pad[..., m - h + 1:] = spec[..., h + 1:]
    else:
        pad[..., :h + 1] = spec[..., :h + 1]
        pad[..., m - h:] = spec[..., h + 1:]
    fine = np.real(np.fft.ifft(pad, axis=-1)) * factor
    fine = fine[..., : (n - 1) * factor + 1]
    return np.moveaxis(fine, -1, axis)


class _SampledWigner:
    """Cubic-spline sampler over a (possibly refined) Wigner array.

    Coarse axes are first refined by exact trigonometric interpolation so the
    spline step stays below SAMPLING_STEP; momentum columns that carry no mass
    (the far tail of an FFT-conjugate axis) are cropped to keep the auxiliary
    line quadrature short.
    """

    def __init__(self, W):
        vals = np.ascontiguousarray(W.values, dtype=float)
        q0, dq = float(W.q_axis[0]), W.q_spacing
        p0, dp = float(W.p_axis[0]), W.p_spacing

        kq = max(1, int(np.ceil(dq / SAMPLING_STEP)))
        kp = max(1, int(np.ceil(dp / SAMPLING_STEP)))
        vals = _fourier_refine(vals, 0, kq)
        vals = _fourier_refine(vals, 1, kp)
        dq /= kq
        dp /= kp

        vmax = np.abs(vals).max()
        live = np.nonzero(np.abs(vals).max(axis=0) > LIVE_REL_TOL * vmax)[0]
        lo = max(0, int(live[0]) - 8)
        hi = min(vals.shape[1], int(live[-1]) + 9)
        vals = vals[:, lo:hi]
        p0 = p0 + lo * dp
        live = np.nonzero(np.abs(vals).max(axis=1) > LIVE_REL_TOL * vmax)[0]
        lo = max(0, int(live[0]) - 8)
        hi = min(vals.shape[0], int(live[-1]) + 9)
        vals = vals[lo:hi, :]
        q0 = q0 + lo * dq

        self.q0, self.dq = q0, dq
        self.p0, self.dp = p0, dp
        self.q_extent = q0 + (vals.shape[0] - 1) * dq
        self.p_extent = p0 + (vals.shape[1] - 1) * dp
        self._filt = spline_filter(vals, order=3)

        half = np.hypot(max(abs(q0), abs(self.q_extent)), max(abs(p0), abs(self.p_extent)))
        n_half = int(np.ceil(half / LINE_STEP))
        self._ys = np.arange(-n_half, n_half + 1) * LINE_STEP
        self._yw = np.full(self._ys.size, LINE_STEP)
        self._yw[0] *= 0.5
        self._yw[-1] *= 0.5

    def at(self, qs, ps):
        iq = (np.asarray(qs) - self.q0) / self.dq
        ip = (np.asarray(ps) - self.p0) / self.dp
        out = map_coordinates(
            self._filt,
            np.array([iq.ravel(), ip.ravel()]),
            order=3,
            prefilter=False,
            mode="constant",
            cval=0.0,
        )
        return out.reshape(np.shape(qs))

    def line_integral(self, theta, xs):
        """(1/2pi) * integral of W along the line q cos + p sin = X."""
        s, c = np.sin(theta), np.cos(theta)
        qs = xs[:, None] * c - self._ys[None, :] * s
        ps = xs[:, None] * s + self._ys[None, :] * c
        return self.at(qs, ps) @ self._yw / (2.0 * np.pi)


class _SpectralWigner:
    """Rotated-line integrals of a gridded Wigner function, done spectrally.

    The line integral (1/2pi) int W dy along q cos(t) + p sin(t) = X is
    re-parameterized along whichever coordinate axis is better conditioned
    (q when |sin| >= |cos|, p otherwise).  The quadrature along that axis is a
    plain Riemann sum over the rows that carry mass, while the evaluation of W
    at the off-grid conjugate coordinate uses the trigonometric interpolant of
    the sampled data, i.e. the transform between rho's off-diagonal argument
    and momentum is carried out by FFT and read off at exactly the needed
    frequencies.  Axes are zero-padded first so the periodic interpolant is
    never consulted where wrap-around could reach live samples.
    """

    def __init__(self, W):
        vals = np.ascontiguousarray(W.values, dtype=float)
        dq, dp = W.q_spacing, W.p_spacing
        vmax = np.abs(vals).max()
        if vmax == 0.0:
            vmax = 1.0

        rows_live = np.nonzero(np.abs(vals).max(axis=1) > LIVE_REL_TOL * vmax)[0]
        cols_live = np.nonzero(np.abs(vals).max(axis=0) > LIVE_REL_TOL * vmax)[0]
        if rows_live.size == 0 or cols_live.size == 0:
            rows_live = np.arange(vals.shape[0])
            cols_live = np.arange(vals.shape[1])
        rq = slice(int(rows_live[0]), int(rows_live[-1]) + 1)
        rp = slice(int(cols_live[0]), int(cols_live[-1]) + 1)
        q_live = W.q_axis[rq]
        p_live = W.p_axis[rp]
        lq = float(np.abs(q_live).max())
        lp = float(np.abs(p_live).max())

        # Beyond this |X| the line misses the live support box entirely, so the
        # row is identically zero and the spectral sum need not be trusted.
        self.x_cut = float(np.hypot(lq, lp))
        sqrt2 = np.sqrt(2.0)
        p_target = sqrt2 * (self.x_cut + lq) + 2.0
        q_target = sqrt2 * (self.x_cut + lp) + 2.0

        # Integrate over q, interpolate in p: live q-rows, padded p-axis.
        a = vals[rq, :]
        n_lo = max(0, int(np.ceil((W.p_axis[0] + p_target) / dp)))
        n_hi = max(0, int(np.ceil((p_target - W.p_axis[-1]) / dp)))
        n_p = next_fast_len(a.shape[1] + n_lo + n_hi)
        padded = np.zeros((a.shape[0], n_p))
        padded[:, n_lo:n_lo + a.shape[1]] = a
        self._spec_p = np.fft.fft(padded, axis=1)
        self._kp = 2.0 * np.pi * np.fft.fftfreq(n_p, d=dp)
        self._p_origin = float(W.p_axis[0]) - n_lo * dp
        self._q_live = q_live
        self._dq = dq

        # Integrate over p, interpolate in q: live p-columns, padded q-axis.
        b = vals[:, rp]
        n_lo = max(0, int(np.ceil((W.q_axis[0] + q_target) / dq)))
        n_hi = max(0, int(np.ceil((q_target - W.q_axis[-1]) / dq)))
        n_q = next_fast_len(b.shape[0] + n_lo + n_hi)
        padded = np.zeros((n_q, b.shape[1]))
        padded[n_lo:n_lo + b.shape[0], :] = b
        self._spec_q = np.fft.fft(padded, axis=0)
        self._kq = 2.0 * np.pi * np.fft.fftfreq(n_q, d=dq)
        self._q_origin = float(W.q_axis[0]) - n_lo * dq
        self._p_live = p_live
        self._dp = dp

    def _slice_spectrum(self, theta):
        """Spectrum S(k) and scaling such that a row is
        scale * Re sum_k S(k) exp(i k X / div)."""
        s, c = np.sin(theta), np.cos(theta)
        if abs(s) >= abs(c):
            shifts = self._q_live * (c / s)
            phases = np.exp(-1j * np.outer(shifts, self._kp))
            spec = np.einsum("lk,lk->k", self._spec_p, phases) * self._dq
            spec *= np.exp(-1j * self._kp * self._p_origin)
            scale = 1.0 / (2.0 * np.pi * abs(s) * self._kp.size)
            if s < 0.0:
                spec = np.conj(spec)
            return spec, self._kp, scale, abs(s)
        shifts = self._p_live * (s / c)
        phases = np.exp(-1j * np.outer(self._kq, shifts))
        spec = np.einsum("km,km->k", self._spec_q, phases) * self._dp
        spec *= np.exp(-1j * self._kq * self._q_origin)
        scale = 1.0 / (2.0 * np.pi * abs(c) * self._kq.size)
        if c < 0.0:
            spec = np.conj(spec)
        return spec, self._kq, scale, abs(c)

    def row_at(self, theta, xs):
        """Row values at arbitrary X positions for one angle."""
        xs = np.asarray(xs, dtype=float)
        spec, ks, scale, div = self._slice_spectrum(theta)
        inside = np.abs(xs) <= self.x_cut
        out = np.zeros(xs.shape)
        if np.any(inside):
            u = xs[inside] / div
            out[inside] = np.real(np.exp(1j * np.outer(u, ks)) @ spec) * scale
        return out

    def row_uniform(self, theta, x0, dx, n):
        """Row values on the uniform grid x0 + j*dx, j = 0..n-1 (chirp-z)."""
        spec, ks, scale, div = self._slice_spectrum(theta)
        shifted = np.fft.fftshift(spec)
        k_sorted = np.fft.fftshift(ks)
        k_lo = k_sorted[0]
        dk = k_sorted[1] - k_sorted[0]
        u0, du = x0 / div, dx / div
        vals = czt(shifted, n, w=np.exp(1j * dk * du), a=np.exp(-1j * dk * u0))
        xs = x0 + dx * np.arange(n)
        row = np.real(np.exp(1j * k_lo * (xs / div)) * vals) * scale
        row[np.abs(xs) > self.x_cut] = 0.0
        return row


def wigner_from_density(rho):
    """W(q, p) as the Fourier transform of rho(q + u/2, q - u/2) over u.

    The momentum axis is FFT-conjugate to the coordinate grid (spacing
    pi / (n_q dq)); requires an even grid size.
    """
    grid = rho.grid
    n = grid.n_q
    if n % 2 != 0:
        raise GridError("wigner_from_density needs an even n_q for the conjugate p-axis")
    dq = grid.spacing
    du = 2.0 * dq

    m = np.arange(n) - n // 2
    idx = np.arange(n)[:, None]
    a = idx + m[None, :]
    b = idx - m[None, :]
    valid = (a >= 0) & (a < n) & (b >= 0) & (b < n)
    slices = np.where(valid, rho.values[a.clip(0, n - 1), b.clip(0, n - 1)], 0.0)

    spec = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(slices, axes=1), axis=1), axes=1) * du
    p_axis = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(n, d=du))
    W = WignerFunction(grid.points.copy(), p_axis, np.real(spec))
    return W.validate()


def density_from_wigner(W, grid=None):
    """Invert the Wigner transform: rho(q, q') from W((q + q')/2, p).

    Midpoints between coordinate grid points are reached by spectral
    half-step shifting of W in q, and the p-integral uses uniform weights so
    that on FFT-conjugate axes the inversion is exact to rounding.
    """
    q_axis = W.q_axis
    n = q_axis.size
    dq = W.q_spacing
    if abs(q_axis[0] + q_axis[-1]) > 1e-9 * abs(q_axis[-1]):
        raise GridError("density_from_wigner expects a symmetric q-axis")
    if grid is None:
        grid = CoordinateGrid(q_max=float(q_axis[-1]), n_q=n)
    if grid.n_q != n or not np.allclose(grid.points, q_axis, rtol=0.0, atol=1e-9):
        raise GridError("target grid must coincide with the Wigner q-axis")

    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dq)
    shifted = np.real(
        np.fft.ifft(np.fft.fft(W.values, axis=0) * np.exp(1j * k * dq / 2.0)[:, None], axis=0)
    )
    rows_half = np.empty((2 * n - 1, W.p_axis.size))
    rows_half[0::2] = W.values
    rows_half[1::2] = shifted[: n - 1]

    d = np.arange(-(n - 1), n)
    phase = np.exp(1j * np.outer(W.p_axis, d * dq)) * (W.p_spacing / (2.0 * np.pi))
    P = rows_half.astype(complex) @ phase

    ii = np.arange(n)
    vals = P[ii[:, None] + ii[None, :], ii[:, None] - ii[None, :] + (n - 1)]
    defect = float(np.abs(vals - vals.conj().T).max())
    vals = 0.5 * (vals + vals.conj().T)
    return DensityMatrix(grid, vals, hermiticity_defect=defect)


def _check_wigner_boundary(W):
    vmax = np.abs(W.values).max()
    edge = max(
        np.abs(W.values[0]).max(),
        np.abs(W.values[-1]).max(),
        np.abs(W.values[:, 0]).max(),
        np.abs(W.values[:, -1]).max(),
    )
    if edge > BOUNDARY_REL_TOL * vmax:
        raise SupportError(
            f"Wigner boundary magnitude {edge:.3e} exceeds {BOUNDARY_REL_TOL:.0e} "
            "of the peak; enlarge the phase-space grid"
        )


def radon(W, tgrid=None):
    """Optical tomogram of a Wigner function by rotated line integrals.

    w(X, theta) = (1/2pi) * integral over the line q cos(theta) + p sin(theta) = X.
    """
    if tgrid is None:
        tgrid = TomogramGrid()
    _check_wigner_boundary(W)
    sw = _SampledWigner(W)
    xs = tgrid.xs
    rows = np.empty((tgrid.n_theta, tgrid.n_x))
    for j, theta in enumerate(tgrid.thetas):
        rows[j] = sw.line_integral(theta, xs)
    return Tomogram(tgrid, rows)


def inverse_radon(w, q_axis=None, p_axis=None, window=None):
    """Filtered back-projection of a tomogram onto a phase-space grid.

    Per theta row: FFT in X, multiply by the |eta| ramp (band-limited at the
    X Nyquist frequency, optionally a Hann window), inverse FFT, then
    back-project with linear interpolation at s = q cos(theta) + p sin(theta)
    and midpoint-rule theta sum.  The row FFT is zero-padded so the ramp acts
    as a linear (not circular) convolution; the filtered projections decay
    only like 1/X^2 and would otherwise wrap their tails back into the
    window.  The result is masked to the reconstruction circle r < x_max:
    outside it the projections carry no information and the truncated tails
    leave percent-level junk.
    """
    tg = w.grid
    if q_axis is None:
        q_axis = np.linspace(-tg.x_max, tg.x_max, min(tg.n_x, 512))
    if p_axis is None:
        p_axis = np.linspace(-tg.x_max, tg.x_max, min(tg.n_x, 512))
    edge = max(np.abs(w.values[:, 0]).max(), np.abs(w.values[:, -1]).max())
    if edge > EDGE_MASS_TOL:
        raise SupportError(
            f"tomogram carries {edge:.3e} at |X| = x_max; support is truncated"
        )

    n_fft = next_fast_len(8 * tg.n_x)
    dx = tg.x_spacing
    # Discrete ramp built as the FFT of the real-space kernel of the
    # Nyquist-band-limited |eta| filter.  Sampling |eta| directly would zero
    # the DC bin and under-weight the lowest bins, which back-projects into
    # a flat negative basin (a constant ~0.6% mass deficit at this padding).
    n = np.fft.fftfreq(n_fft, d=1.0 / n_fft).astype(int)
    kern = np.zeros(n_fft)
    kern[0] = np.pi / (2.0 * dx * dx)
    odd = (n % 2) != 0
    kern[odd] = -2.0 / (np.pi * (n[odd] * dx) ** 2)
    ramp = np.real(np.fft.fft(kern)) * dx
    if window == "hann":
        eta = 2.0 * np.pi * np.fft.fftfreq(n_fft, d=dx)
        ramp = ramp * 0.5 * (1.0 + np.cos(eta * dx))
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")

    spec = np.fft.fft(w.values, n=n_fft, axis=1) * ramp
    filtered = np.real(np.fft.ifft(spec, axis=1))[:, : tg.n_x]

    out = np.zeros((q_axis.size, p_axis.size))
    qq = np.asarray(q_axis)[:, None]
    pp = np.asarray(p_axis)[None, :]
    for j, theta in enumerate(tg.thetas):
        s = qq * np.cos(theta) + pp * np.sin(theta)
        out += np.interp(s.ravel(), tg.xs, filtered[j], left=0.0, right=0.0).reshape(out.shape)
    out *= tg.theta_spacing
    out[np.hypot(qq, pp) >= tg.x_max] = 0.0
    return WignerFunction(np.asarray(q_axis, dtype=float), np.asarray(p_axis, dtype=float), out)


def tomogram_from_density(rho, tgrid=None, route="via_wigner"):
    """Tomogram of a density matrix.

    route="via_wigner" (default) composes wigner_from_density with radon.
    route="direct" runs the one-step double integral: the u-transform of the
    anti-diagonals (an FFT, shared with the Wigner construction) read off at
    exactly the frequencies the line dictates, then a quadrature along
    whichever phase-space axis crosses the line least steeply.  Both
    discretize the same analytic object and agree to ~1e-4.
    """
    if tgrid is None:
        tgrid = TomogramGrid()
    if route == "via_wigner":
        return radon(wigner_from_density(rho), tgrid)
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")

    W = wigner_from_density(rho)
    _check_wigner_boundary(W)
    engine = _SpectralWigner(W)
    x0 = float(tgrid.xs[0])
    rows = np.empty((tgrid.n_theta, tgrid.n_x))
    for j, theta in enumerate(tgrid.thetas):
        rows[j] = engine.row_uniform(theta, x0, tgrid.x_spacing, tgrid.n_x)
    return Tomogram(tgrid, rows)


def density_from_tomogram(w, grid=None, window=None):
    """Density matrix from a tomogram via filtered back-projection.

    The reconstruction runs through inverse_radon on the coordinate grid
    points (momentum axis equal to the coordinate axis) and the exact Wigner
    inversion.  Hermiticity is enforced by symmetrization; the pre-projection
    defect is recorded on the result.
    """
    if grid is None:
        grid = CoordinateGrid(q_max=w.grid.x_max, n_q=512)
    W = inverse_radon(w, q_axis=grid.points, p_axis=grid.points, window=window)
    return density_from_wigner(W, grid)


def density_point_from_tomogram(w, q, qp):
    """Single off-diagonal rho(q, q') directly from the tomogram.

    Collapses the frequency integral of the inversion formula at
    eta = (q - q') / sin(theta) and sums over theta rows.  Only meaningful
    away from the diagonal: within 3 X-spacings of it the collapsed frequency
    leaves the resolved band at every angle and the quadrature is singular.
    """
    d = float(q) - float(qp)
    mid = 0.5 * (float(q) + float(qp))
    tg = w.grid
    if abs(d) <= 3.0 * tg.x_spacing:
        raise SingularityError(
            f"|q - q'| = {abs(d):.4f} within 3 grid spacings of the diagonal; "
            "use the via-Wigner reconstruction there"
        )
    s = np.sin(tg.thetas)
    c = np.cos(tg.thetas)
    eta = d / s
    phases = np.exp(1j * np.outer(eta, tg.xs))
    what = np.einsum("ji,i,ji->j", w.values, tg.x_trapezoid_weights, phases)
    integrand = (np.abs(d) / s**2) * what * np.exp(-1j * eta * c * mid)
    return complex(np.sum(integrand) * tg.theta_spacing / (2.0 * np.pi))


def tomogram_from_wavefunction(psi, tgrid=None):
    """Tomogram of a pure state through the rotated-quadrature kernel.

    Per theta the amplitude is a chirped Fourier transform of the state read
    off at frequencies X / sin(theta) with the chirp-z transform.  That sweep
    must stay inside one period of the sampled transform, which fails once
    |sin| drops below |cos|, so those rows integrate over the momentum-space
    wavefunction instead: the quadrature operator keeps its form under
    q -> p, theta -> theta - pi/2, swapping the roles of sin and cos.  Either
    way the division is by a factor of at least 1/sqrt(2).  Squaring the
    amplitude makes every row nonnegative by construction.
    """
    if tgrid is None:
        tgrid = TomogramGrid()
    grid = psi.grid
    dq = grid.spacing
    dx = tgrid.x_spacing
    x0 = float(tgrid.xs[0])

    # Momentum samples on a q-padded FFT axis.  The padding stretches the
    # period of the momentum-sampled transform to n_fft * dq, which keeps the
    # frequency sweep X / cos(theta) of the momentum-side rows unaliased.
    n_fft = next_fast_len(4 * grid.n_q)
    spec = np.fft.fft(psi.values * grid.trapezoid_weights, n=n_fft)
    ps = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n_fft, d=dq))
    dp = ps[1] - ps[0]
    psi_p = np.fft.fftshift(spec) * np.exp(-1j * ps * grid.points[0]) / np.sqrt(2.0 * np.pi)

    rows = np.empty((tgrid.n_theta, tgrid.n_x))
    for j, theta in enumerate(tgrid.thetas):
        s, c = np.sin(theta), np.cos(theta)
        if abs(s) < 1e-12:
            raise SingularityError("tomogram row requested at sin(theta) = 0")
        if abs(s) >= abs(c):
            chirp = np.exp(1j * grid.points**2 * c / (2.0 * s))
            cvec = psi.values * chirp * grid.trapezoid_weights
            amp = czt(cvec, tgrid.n_x, np.exp(-1j * dx * dq / s), np.exp(1j * x0 * dq / s))
            div = abs(s)
        else:
            sp = -c
            chirp = np.exp(1j * ps**2 * s / (2.0 * sp))
            cvec = psi_p * chirp * dp
            amp = czt(cvec, tgrid.n_x, np.exp(-1j * dx * dp / sp), np.exp(1j * x0 * dp / sp))
            div = abs(c)
        rows[j] = np.abs(amp) ** 2 / (2.0 * np.pi * div)
    return Tomogram(tgrid, rows)


def moments(w, n):
    """Per-row quadrature moments <X^n>(theta), returned as an n_theta vector."""
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    return (w.values * w.grid.xs**n) @ w.grid.x_trapezoid_weights


@dataclass
class SymplecticTomogram:
    """Homogeneous symplectic tomogram M(X, mu, nu) backed by a Wigner function.

    Evaluation reduces by homogeneity to an optical row at the polar angle of
    (mu, nu), computed on demand as a single line integral.
    """

    wigner: WignerFunction
    _engine: _SpectralWigner = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._engine = _SpectralWigner(self.wigner)

    def __call__(self, X, mu, nu):
        X = np.asarray(X, dtype=float)
        mu = np.asarray(mu, dtype=float)
        nu = np.asarray(nu, dtype=float)
        X, mu, nu = np.broadcast_arrays(X, mu, nu)
        r = np.hypot(mu, nu)
        if np.any(r < 1e-12):
            raise DegenerateError("symplectic tomogram undefined at mu = nu = 0")
        phi = np.arctan2(nu, mu)
        flip = phi < 0.0
        phi = np.where(flip, phi + np.pi, phi)
        wrap = phi >= np.pi
        phi = np.where(wrap, phi - np.pi, phi)
        flip = flip ^ wrap
        xi = np.where(flip, -X, X) / r

        flat_phi = np.atleast_1d(phi).ravel()
        flat_xi = np.atleast_1d(xi).ravel()
        flat = np.empty(flat_xi.shape)
        for angle in np.unique(flat_phi):
            sel = flat_phi == angle
            flat[sel] = self._engine.row_at(float(angle), flat_xi[sel])
        out = flat.reshape(xi.shape) / r
        if out.shape == ():
            return float(out)
        return out


def symplectic_tomogram(W):
    """Wrap a Wigner function as an on-demand symplectic tomogram evaluator."""
    return SymplecticTomogram(W)
