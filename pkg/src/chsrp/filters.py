"""Compensating filters that undo the ``j^l J_l(kr)`` mode coloration.

Three designs are provided:

* ``inverse``  -- plain reciprocal, single ring only.
* ``tikhonov`` -- regularised reciprocal ``(-j)^l J / (J^2 + alpha)``.
* ``minnorm``  -- minimum-norm filter vector across rings that satisfies
  ``sum_p j^l J_l(k r_p) H_p = 1``; reduces to ``inverse`` for one ring.

Banks are indexed ``values[p, L + l, b]`` like harmonic coefficients.
Entries that cannot be designed are zero and flagged in ``usable``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry
from .harmonics import bessel_j, bessel_zeros, j_power, wavenumber

EPS_ZERO = 1e-6
DEFAULT_ALPHA = 1e-2
METHODS = ("inverse", "tikhonov", "minnorm")


class FilterDesignError(ValueError):
    pass


@dataclass(frozen=True)
class FilterBank:
    method: str
    alpha: float
    values: np.ndarray
    usable: np.ndarray
    L: int
    bins: np.ndarray
    freqs: np.ndarray

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    @property
    def usable_bins(self) -> np.ndarray:
        """Bins where every order has a valid filter."""
        return self.usable.all(axis=0)


def _bessel_table(geometry: ArrayGeometry, L: int, freqs) -> np.ndarray:
    """``J_l(k r_p)`` with shape ``(P, 2L + 1, n_bins)``."""
    k = wavenumber(freqs, geometry.sound_speed)
    table = np.empty((geometry.n_rings, 2 * L + 1, len(k)))
    for p, r in enumerate(geometry.radii):
        for i, l in enumerate(range(-L, L + 1)):
            table[p, i] = bessel_j(l, k * r)
    return table


def _prepare(geometry, L, freqs, bins):
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if L < 0:
        raise FilterDesignError("order L must be non-negative")
    bins = np.arange(len(freqs)) if bins is None else np.asarray(bins)
    if len(bins) != len(freqs):
        raise FilterDesignError("bins and freqs differ in length")
    return freqs, bins


def _conj_phase(L: int) -> np.ndarray:
    # (-j)^l, broadcast over (ring, order, bin)
    return j_power(-np.arange(-L, L + 1))[None, :, None]


def _require_single_ring(geometry: ArrayGeometry, method: str):
    if geometry.n_rings != 1:
        raise FilterDesignError(f"{method} design needs a single ring, got {geometry.n_rings}")


def _check_orders(usable: np.ndarray, L: int, method: str):
    dead = ~usable.any(axis=1)
    if dead.any():
        orders = [int(l) for l in np.arange(-L, L + 1)[dead]]
        raise FilterDesignError(f"{method}: every bin is singular for orders {orders}")


def design_inverse(geometry: ArrayGeometry, L: int, freqs, bins=None) -> FilterBank:
    """``H_l = 1 / (j^l J_l(kr))``; bins with ``|J_l| < 1e-6`` are flagged."""
    _require_single_ring(geometry, "inverse")
    freqs, bins = _prepare(geometry, L, freqs, bins)
    J = _bessel_table(geometry, L, freqs)
    usable = np.abs(J[0]) >= EPS_ZERO
    safe = np.where(usable[None], J, 1.0)
    values = np.where(usable[None], _conj_phase(L) / safe, 0.0)
    _check_orders(usable, L, "inverse")
    return FilterBank("inverse", 0.0, values.astype(complex), usable, L, bins, freqs)


def design_tikhonov(geometry: ArrayGeometry, L: int, freqs, alpha: float = DEFAULT_ALPHA,
                    bins=None) -> FilterBank:
    """Regularised inverse ``(-j)^l J_l / (J_l^2 + alpha)``.

    With several rings the regularised minimum-norm form
    ``(-j)^l J_l(k r_p) / (sum_q J_l(k r_q)^2 + alpha)`` is used, which is the
    same expression for one ring.
    """
    if alpha < 0:
        raise FilterDesignError(f"alpha must be >= 0, got {alpha}")
    freqs, bins = _prepare(geometry, L, freqs, bins)
    J = _bessel_table(geometry, L, freqs)
    denom = (J ** 2).sum(axis=0) + alpha
    # only alpha == 0 can hit a zero denominator
    usable = denom >= EPS_ZERO ** 2 if alpha == 0 else np.ones(denom.shape, dtype=bool)
    safe = np.where(usable, denom, 1.0)
    values = np.where(usable[None], _conj_phase(L) * J / safe[None], 0.0)
    return FilterBank("tikhonov", float(alpha), values.astype(complex), usable, L, bins, freqs)


def design_minnorm(geometry: ArrayGeometry, L: int, freqs, bins=None) -> FilterBank:
    """Minimum-norm compensating vector over the rings.

    Solves ``min ||H||^2`` subject to ``b^T H = 1`` with
    ``b_p = j^l J_l(k r_p)``, giving ``H_p = conj(b_p) / ||b||^2``. Bins
    where all rings sit at a Bessel zero (``||b|| < 1e-6``) are flagged.
    """
    freqs, bins = _prepare(geometry, L, freqs, bins)
    J = _bessel_table(geometry, L, freqs)
    energy = (J ** 2).sum(axis=0)
    usable = energy >= EPS_ZERO ** 2
    safe = np.where(usable, energy, 1.0)
    values = np.where(usable[None], _conj_phase(L) * J / safe[None], 0.0)
    return FilterBank("minnorm", 0.0, values.astype(complex), usable, L, bins, freqs)


def design_filters(geometry: ArrayGeometry, L: int, freqs, method: str = "minnorm",
                   alpha: float = DEFAULT_ALPHA, bins=None) -> FilterBank:
    if method == "inverse":
        return design_inverse(geometry, L, freqs, bins)
    if method == "tikhonov":
        return design_tikhonov(geometry, L, freqs, alpha, bins)
    if method == "minnorm":
        return design_minnorm(geometry, L, freqs, bins)
    raise FilterDesignError(f"unknown filter method {method!r}; choose from {METHODS}")


def mode_vectors(geometry: ArrayGeometry, L: int, freqs) -> np.ndarray:
    """``b_p = j^l J_l(k r_p)``, shape ``(P, 2L + 1, n_bins)``."""
    J = _bessel_table(geometry, L, np.atleast_1d(freqs))
    return j_power(np.arange(-L, L + 1))[None, :, None] * J


def compensation_residual(bank: FilterBank, geometry: ArrayGeometry) -> np.ndarray:
    """``sum_p b_p H_p - 1`` per (order, bin); zero for an exact design."""
    b = mode_vectors(geometry, bank.L, bank.freqs)
    return (b * bank.values).sum(axis=0) - 1.0


def reciprocal_magnitude_curve(bank: FilterBank) -> np.ndarray:
    """``1 / ||H_l(bin)||`` per (order, bin); flagged entries give 0.

    For one ring this is ``|J_l(kr)|`` under the inverse design.
    """
    norm = np.sqrt((np.abs(bank.values) ** 2).sum(axis=0))
    with np.errstate(divide="ignore"):
        curve = np.where(norm > 0, 1.0 / np.where(norm > 0, norm, 1.0), np.inf)
    return np.where(bank.usable, curve, 0.0)


def zero_frequencies(geometry: ArrayGeometry, L: int, f_lo: float, f_hi: float) -> list[tuple[int, int, float]]:
    """Frequencies in ``[f_lo, f_hi]`` where ``J_l(k r_p) = 0``.

    Returns ``(order, ring_index, freq_hz)`` rows for ``l = 0..L``; negative
    orders share the zeros of their positive counterparts.
    """
    rows = []
    c = geometry.sound_speed
    for p, r in enumerate(geometry.radii):
        x_max = 2 * np.pi * f_hi * r / c
        for l in range(L + 1):
            for z in bessel_zeros(l, x_max):
                f = z * c / (2 * np.pi * r)
                if f_lo <= f <= f_hi:
                    rows.append((l, p, float(f)))
    return rows
