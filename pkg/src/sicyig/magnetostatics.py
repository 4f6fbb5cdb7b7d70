"""Dipolar field of a uniformly magnetized nanostripe and derived quantities.

The stripe is a rectangular prism, infinitely long along y in the closed
form used here (valid for length >> width).  Magnetization is saturated
along z, so the field derives from two charged faces at z = +/- W/2.  All
fields are in Gauss, lengths in nm.

Coordinates: stripe center at the origin, x normal to the wide faces
(the membrane stack direction), z across the stripe width and along the
applied field, y along the stripe length.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar


class InsideStripeError(ValueError):
    """Field requested at a point inside the magnet volume."""


@dataclass(frozen=True)
class StripeGeometry:
    """Nanostripe dimensions and saturation field (B_sat = 4 pi M_s).

    Parameters
    ----------
    width_nm : stripe width W along z
    thickness_nm : stripe thickness T along x
    length_um : stripe length along y; only used for validity checks
    b_sat_G : saturation induction 4 pi M_s in Gauss
    center_nm : stripe center position (defaults to the origin)
    """

    width_nm: float
    thickness_nm: float
    length_um: float = 100.0
    b_sat_G: float = 1700.0
    center_nm: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if min(self.width_nm, self.thickness_nm, self.length_um, self.b_sat_G) <= 0:
            raise ValueError("stripe dimensions and b_sat_G must be positive")
        if self.length_um * 1e3 < 10.0 * self.width_nm:
            warnings.warn(
                "stripe length below 10x width: infinite-length closed form "
                "may be inaccurate",
                stacklevel=2,
            )

    def contains(self, point) -> bool:
        x, y, z = (np.asarray(point, float) - np.asarray(self.center_nm))
        return (
            abs(x) < self.thickness_nm / 2
            and abs(z) < self.width_nm / 2
            and abs(y) < self.length_um * 1e3 / 2
        )


@dataclass(frozen=True)
class FieldSample:
    position_nm: tuple[float, float, float]
    b_dip_G: tuple[float, float, float]
    grad_bz_x_G_per_nm: float


@dataclass(frozen=True)
class EffectiveShift:
    """Effective Zeeman shift of a spin in the stripe field, in Gauss.

    ``first_order_G`` is the dipolar field component along the applied
    field; ``second_order_G`` the transverse component squared over twice
    the applied field.
    """

    first_order_G: float
    second_order_G: float
    total_G: float = field(init=False)

    def __post_init__(self):
        if self.second_order_G < 0:
            raise ValueError("second-order shift cannot be negative")
        object.__setattr__(self, "total_G", self.first_order_G + self.second_order_G)


def _bxz_2d(geom: StripeGeometry, x, z):
    """In-plane flux density (Bx, Bz) of the infinite stripe at (x, z).

    The atan2 kernel yields B (not H) everywhere, including inside the
    magnet; outside the magnet B = H.  Arguments broadcast.
    """
    x = np.asarray(x, float)
    z = np.asarray(z, float)
    c1 = z - geom.width_nm / 2
    c2 = z + geom.width_nm / 2
    xp = x + geom.thickness_nm / 2
    xm = x - geom.thickness_nm / 2
    pre = geom.b_sat_G / (2 * np.pi)
    bz = pre * (np.arctan2(xp, c1) - np.arctan2(xm, c1)
                - np.arctan2(xp, c2) + np.arctan2(xm, c2))
    with np.errstate(divide="ignore"):
        bx = 0.5 * pre * (np.log((xp ** 2 + c1 ** 2) / (xm ** 2 + c1 ** 2))
                          - np.log((xp ** 2 + c2 ** 2) / (xm ** 2 + c2 ** 2)))
    return bx, bz


def stripe_field(geom: StripeGeometry, point) -> np.ndarray:
    """Dipolar field B (Gauss) of the stripe at a point outside its volume.

    Assumes magnetization saturated along z (applied field above
    saturation; not checked here).  Raises :class:`InsideStripeError` for
    points inside the magnet.
    """
    p = np.asarray(point, float) - np.asarray(geom.center_nm)
    if geom.contains(point):
        raise InsideStripeError(f"point {tuple(point)} lies inside the stripe")
    bx, bz = _bxz_2d(geom, p[0], p[2])
    return np.array([float(bx), 0.0, float(bz)])


def demag_bz_inside(geom: StripeGeometry, z) -> np.ndarray:
    """B_z on the stripe mid-plane (x = 0) inside the magnet.

    Used by the spin-wave model: the demagnetizing factor along z is
    N_zz(z) = 1 - B_z(0, z)/B_sat.
    """
    _, bz = _bxz_2d(geom, 0.0, np.asarray(z, float))
    return np.asarray(bz, float)


def _grad_bz_x(geom: StripeGeometry, x, z, step_nm: float = 0.05):
    _, bp = _bxz_2d(geom, np.asarray(x, float) + step_nm, z)
    _, bm = _bxz_2d(geom, np.asarray(x, float) - step_nm, z)
    return (bp - bm) / (2 * step_nm)


def gradient_profile(geom: StripeGeometry, x_start_nm: float, x_stop_nm: float,
                     n_points: int = 200, z_nm: float = 0.0,
                     step_nm: float = 0.05) -> list[FieldSample]:
    """Sample B and dB_z/dx along x at fixed z, ordered by x.

    The gradient uses a central finite difference with ``step_nm``
    (default well below the 0.1 nm contract).
    """
    if n_points < 1 or not x_stop_nm > x_start_nm:
        raise ValueError("empty or inverted x range")
    if x_start_nm <= geom.thickness_nm / 2:
        raise ValueError("x range must stay strictly above the stripe surface")
    xs = np.linspace(x_start_nm, x_stop_nm, n_points)
    bx, bz = _bxz_2d(geom, xs, z_nm)
    g = _grad_bz_x(geom, xs, z_nm, step_nm)
    return [
        FieldSample((float(x), 0.0, float(z_nm)),
                    (float(bxi), 0.0, float(bzi)), float(gi))
        for x, bxi, bzi, gi in zip(xs, bx, bz, g)
    ]


def find_xopt(geom: StripeGeometry) -> tuple[float, float]:
    """Locate the distance x (on the mid-plane, z = 0) maximizing |dB_z/dx|.

    Returns (x_opt in nm, max gradient magnitude in G/nm).  Bracketed
    scalar maximization, resolution well under 0.5 nm.
    """
    lo = geom.thickness_nm / 2 + 1.0
    hi = geom.thickness_nm / 2 + 6.0 * geom.width_nm

    def neg_abs_grad(x):
        return -abs(float(_grad_bz_x(geom, x, 0.0)))

    res = minimize_scalar(neg_abs_grad, bounds=(lo, hi), method="bounded",
                          options={"xatol": 0.01})
    return float(res.x), float(-res.fun)


def homogeneity_report(geom: StripeGeometry, x_nm: float,
                       z_half_range_nm: float) -> float:
    """Max |B_z(x, z) - B_z(x, 0)| over |z| <= z_half_range, in Gauss.

    Sampled at <= 1 nm pitch.
    """
    if x_nm <= geom.thickness_nm / 2:
        raise ValueError("x must be above the stripe surface")
    if z_half_range_nm < 0:
        raise ValueError("z_half_range must be nonnegative")
    if z_half_range_nm == 0:
        return 0.0
    n = max(3, int(np.ceil(2 * z_half_range_nm)) + 1)
    zs = np.linspace(-z_half_range_nm, z_half_range_nm, n)
    _, bz = _bxz_2d(geom, x_nm, zs)
    _, bz0 = _bxz_2d(geom, x_nm, 0.0)
    return float(np.max(np.abs(bz - bz0)))


def effective_zeeman_shift(geom: StripeGeometry, point, b0_G: float) -> EffectiveShift:
    """Effective resonance-field shift at a point: B_dz + B_dx^2/(2 B0)."""
    if b0_G <= 0:
        raise ValueError("b0_G must be positive")
    b = stripe_field(geom, point)
    return EffectiveShift(first_order_G=float(b[2]),
                          second_order_G=float(b[0] ** 2 / (2 * b0_G)))
