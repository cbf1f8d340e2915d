"""Bessel functions and circular-harmonic decomposition of ring pressures.

Harmonic orders are always the symmetric set ``-L..L``; along an order
axis, index ``i`` holds order ``i - L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, Ring, max_order
from .pipeline import SpectralFrame

MAX_BESSEL_ORDER = 64
_SERIES_LIMIT = 12.0
_SERIES_TERMS = 48
_RESCALE = 1e200

# j**l for l mod 4, exact
_J_POWERS = np.array([1, 1j, -1, -1j])


class OrderLimitError(ValueError):
    """Requested harmonic order exceeds what the ring sampling supports."""


def j_power(orders) -> np.ndarray:
    """Exact ``j**l`` for integer orders (negative allowed)."""
    return _J_POWERS[np.mod(orders, 4)]


def _series(n: int, x: np.ndarray) -> np.ndarray:
    # sum_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!)
    half = x / 2.0
    term = half ** n / math.factorial(n)
    total = term.copy()
    q = -half * half
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * (m + n))
        total += term
    return total


def _miller(n: int, x: np.ndarray) -> np.ndarray:
    # downward recurrence from an order where J is negligible, normalised
    # with J_0 + 2 * sum_k J_2k = 1
    top = max(n, float(x.max()))
    start = 2 * int((top + 30 + 8 * top ** (1 / 3)) // 2 + 1)
    two_over_x = 2.0 / x
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    ans = np.zeros_like(x)
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE
        if big.any():
            for arr in (j_cur, j_next, norm, ans):
                arr[big] /= _RESCALE
        order = k - 1
        if order == n:
            ans = j_cur.copy()
        if order > 0 and order % 2 == 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return ans / norm


def bessel_j(order: int, x):
    """Bessel function of the first kind ``J_order(x)``.

    Ascending power series below ``x = 12``, Miller's normalised downward
    recurrence above. Works elementwise on arrays.

    Parameters
    ----------
    order : int
        Integer order with ``|order| <= 64``.
    x : float or array_like
        Real argument.
    """
    if int(order) != order:
        raise ValueError(f"order must be an integer, got {order}")
    order = int(order)
    if abs(order) > MAX_BESSEL_ORDER:
        raise ValueError(f"|order| must be <= {MAX_BESSEL_ORDER}, got {order}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if not np.all(np.isfinite(xa)):
        raise ValueError("Bessel argument must be finite")
    n = abs(order)
    ax = np.abs(xa)
    out = np.empty_like(ax)
    small = ax < _SERIES_LIMIT
    if small.any():
        out[small] = _series(n, ax[small])
    if (~small).any():
        out[~small] = _miller(n, ax[~small])
    # J_n(-x) = (-1)^n J_n(x); J_{-n}(x) = (-1)^n J_n(x)
    sign = np.where(xa < 0, (-1.0) ** n, 1.0)
    if order < 0:
        sign = sign * (-1.0) ** n
    out = out * sign
    return float(out[0]) if scalar else out


def bessel_zeros(order: int, x_max: float, step: float = 0.05) -> np.ndarray:
    """Positive zeros of ``J_order`` below ``x_max`` (bracketing + Brent)."""
    from scipy.optimize import brentq

    grid = np.arange(step, x_max + step, step)
    vals = bessel_j(order, grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(lambda t: bessel_j(order, t), a, b, xtol=1e-14))
    return np.array([r for r in roots if r <= x_max])


def wavenumber(freqs, sound_speed: float) -> np.ndarray:
    return 2 * np.pi * np.asarray(freqs, dtype=float) / sound_speed


def ideal_pressure(k, ring: Ring, theta, theta_i: float, amplitude: complex = 1.0):
    """Plane-wave pressure ``S exp(j k r cos(theta - theta_i))`` on a ring."""
    return amplitude * np.exp(1j * np.asarray(k) * ring.radius * np.cos(np.asarray(theta) - theta_i))


def analytic_coefficient(l: int, k, ring: Ring, theta_i: float, amplitude: complex = 1.0):
    """Exact harmonic coefficient ``S j^l J_l(k r) exp(-j l theta_i)``."""
    return amplitude * j_power(l) * bessel_j(l, np.asarray(k) * ring.radius) * np.exp(-1j * l * theta_i)


def mode_strength(l: int, kr) -> np.ndarray:
    """``j^l J_l(kr)``, the factor the plane wave imprints on order ``l``."""
    return j_power(l) * bessel_j(l, kr)


def decompose_ring(pressures, L: int, ring: Ring | None = None, angles=None) -> np.ndarray:
    """Spatial DFT of one ring's pressures onto orders ``-L..L``.

    ``C_l = (1/N) sum_n x_n exp(-j l theta_n)`` with the physical mic angles,
    so a pure mode ``exp(j l theta)`` yields ``C_l = 1``.

    Parameters
    ----------
    pressures : array_like
        Shape ``(N,)`` or ``(N, n_bins)``, ordered by mic index.
    L : int
        Highest order; needs ``2L + 1 <= N``.
    ring, angles
        Source of the mic angles. Without either, mic 0 sits at angle 0.

    Returns
    -------
    ndarray
        Shape ``(2L + 1,)`` or ``(2L + 1, n_bins)``.
    """
    x = np.asarray(pressures)
    n_mics = x.shape[0]
    if 2 * L + 1 > n_mics or L < 0:
        raise OrderLimitError(
            f"order L={L} needs 2L+1={2 * L + 1} mics, ring has N={n_mics}"
        )
    if angles is None:
        angles = ring.mic_angles if ring is not None else 2 * np.pi * np.arange(n_mics) / n_mics
    if len(angles) != n_mics:
        raise ValueError(f"{len(angles)} angles for {n_mics} pressures")
    return decomposition_matrix(L, np.asarray(angles)) @ x


def decomposition_matrix(L: int, angles: np.ndarray) -> np.ndarray:
    orders = np.arange(-L, L + 1)
    return np.exp(-1j * np.outer(orders, angles)) / len(angles)


@dataclass(frozen=True)
class HarmonicCoefficients:
    """Per-ring harmonic coefficients, ``values[p, L + l, b]``."""

    values: np.ndarray
    L: int
    bins: np.ndarray
    freqs: np.ndarray

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    @property
    def n_rings(self) -> int:
        return self.values.shape[0]

    def order(self, l: int) -> np.ndarray:
        return self.values[:, l + self.L, :]


class Decomposer:
    """Precomputed per-ring decomposition matrices for one geometry and order."""

    def __init__(self, geometry: ArrayGeometry, L: int):
        if L < 0 or L > max_order(geometry):
            raise OrderLimitError(
                f"order L={L} exceeds the limit {max_order(geometry)} of rings "
                f"with N={[r.n_mics for r in geometry.rings]}"
            )
        self.geometry = geometry
        self.L = L
        self.slices = geometry.channel_slices()
        self.matrices = [decomposition_matrix(L, r.mic_angles) for r in geometry.rings]

    def __call__(self, spectra: np.ndarray) -> np.ndarray:
        if spectra.shape[0] != self.geometry.n_channels:
            raise ValueError(
                f"frame has {spectra.shape[0]} channels, geometry has {self.geometry.n_channels}"
            )
        out = np.empty((len(self.matrices), 2 * self.L + 1, spectra.shape[1]), dtype=complex)
        for p, (sl, mat) in enumerate(zip(self.slices, self.matrices)):
            np.matmul(mat, spectra[sl], out=out[p])
        return out


def decompose_array(frame: SpectralFrame, geometry: ArrayGeometry, L: int,
                    bins=None) -> HarmonicCoefficients:
    """Decompose every ring of a spectral frame, optionally on a bin subset.

    ``bins`` are absolute DFT bin indices contained in ``frame.bins``.
    """
    spectra, fbins, freqs = frame.spectra, frame.bins, frame.freqs
    if bins is not None:
        bins = np.asarray(bins)
        pos = np.searchsorted(fbins, bins)
        if np.any(pos >= len(fbins)) or not np.array_equal(fbins[np.minimum(pos, len(fbins) - 1)], bins):
            raise ValueError("requested bins are not all present in the frame")
        spectra, fbins, freqs = spectra[:, pos], bins, freqs[pos]
    values = Decomposer(geometry, L)(spectra)
    return HarmonicCoefficients(values=values, L=L, bins=fbins, freqs=freqs)


def analytic_coefficients(geometry: ArrayGeometry, L: int, freqs, theta_i: float,
                          amplitude=1.0, bins=None) -> HarmonicCoefficients:
    """Exact coefficients of a plane wave from ``theta_i`` (radians) for all rings."""
    freqs = np.asarray(freqs, dtype=float)
    k = wavenumber(freqs, geometry.sound_speed)
    values = np.empty((geometry.n_rings, 2 * L + 1, len(freqs)), dtype=complex)
    for p, ring in enumerate(geometry.rings):
        for i, l in enumerate(range(-L, L + 1)):
            values[p, i] = analytic_coefficient(l, k, ring, theta_i, amplitude)
    if bins is None:
        bins = np.arange(len(freqs))
    return HarmonicCoefficients(values=values, L=L, bins=np.asarray(bins), freqs=freqs)


def aliasing_bound(l: int, kr: float, n_mics: int, amplitude: float = 1.0, terms: int = 6) -> float:
    """Upper bound on ``|decomposed C_l - analytic C_l|`` for ideal ring sampling.

    Sums ``|J_m(kr)|`` over the aliased orders ``m = l + q N`` (``q != 0``),
    ``|q| <= terms``; higher images are far below double precision for the
    operating range.
    """
    total = 0.0
    for q in range(-terms, terms + 1):
        m = l + q * n_mics
        if q == 0 or abs(m) > MAX_BESSEL_ORDER:
            continue
        total += abs(bessel_j(m, kr))
    return abs(amplitude) * total
