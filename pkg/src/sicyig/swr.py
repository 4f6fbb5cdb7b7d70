"""Spin-wave resonances of the stripe, quantized across its width.

A deliberately minimal 1D model: the internal field B_int(z) follows from
the stripe's own demagnetizing profile, the local precession frequency is
the in-plane Kittel expression, and exchange couples neighbouring slices.
Eigenfrequencies of

    [- gamma * D_ex * d^2/dz^2 + omega_local(z)] psi = omega psi

are swept against the applied field to place resonance lines.  Free
(unpinned) lateral boundaries are the default; they let modes sit in the
demagnetizing wells at the stripe edges, which is what produces the
weak, edge-confined line above the main quasi-uniform resonance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .constants import GYROMAGNETIC_MHZ_PER_G
from .magnetostatics import StripeGeometry, demag_bz_inside

# Exchange stiffness 2A/M_s of yttrium iron garnet in G nm^2
# (A ~ 3.7 pJ/m, M_s ~ 140 emu/cm^3).
YIG_EXCHANGE_G_NM2 = 5.4e5


@dataclass(frozen=True)
class SwrModel:
    geom: StripeGeometry
    exchange_G_nm2: float = YIG_EXCHANGE_G_NM2
    n_grid: int = 512
    gyromag_MHz_per_G: float = GYROMAGNETIC_MHZ_PER_G
    boundary: str = "free"  # "free" or "pinned"

    def __post_init__(self):
        if self.n_grid < 64:
            raise ValueError("n_grid must be at least 64")
        if self.exchange_G_nm2 <= 0:
            raise ValueError("exchange stiffness must be positive")
        if self.boundary not in ("free", "pinned"):
            raise ValueError("boundary must be 'free' or 'pinned'")


@dataclass(frozen=True)
class SwrLine:
    mode_index: int
    resonance_field_G: float
    oscillator_strength: float
    edge_localized: bool


def internal_field_profile(geom: StripeGeometry, b0_G: float,
                           n_grid: int = 512):
    """Internal field B_int(z) = B0 - N_zz(z) B_sat across the width.

    Returns (z grid in nm, B_int in G, saturated flag).  The flag is
    False when B0 does not exceed the largest demagnetizing field on the
    grid, i.e. the uniform-magnetization assumption is doubtful.
    """
    if n_grid < 8:
        raise ValueError("n_grid too small")
    dz = geom.width_nm / n_grid
    z = -geom.width_nm / 2 + (np.arange(n_grid) + 0.5) * dz
    n_zz = 1.0 - demag_bz_inside(geom, z) / geom.b_sat_G
    b_int = b0_G - n_zz * geom.b_sat_G
    saturated = bool(b0_G > n_zz.max() * geom.b_sat_G)
    return z, b_int, saturated


def _eigenfrequencies(model: SwrModel, b0_G: float, n_modes: int,
                      with_vectors: bool = False):
    z, b_int, _ = internal_field_profile(model.geom, b0_G, model.n_grid)
    dz = z[1] - z[0]
    b_pos = np.clip(b_int, 0.0, None)
    w_loc = model.gyromag_MHz_per_G * np.sqrt(b_pos * (b_pos + model.geom.b_sat_G))
    t = model.gyromag_MHz_per_G * model.exchange_G_nm2 / dz ** 2
    diag = 2 * t + w_loc
    if model.boundary == "free":
        diag = diag.copy()
        diag[0] -= t
        diag[-1] -= t
    off = -t * np.ones(model.n_grid - 1)
    sel = (0, min(n_modes, model.n_grid) - 1)
    if with_vectors:
        vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=sel)
        return z, vals, vecs
    vals = eigh_tridiagonal(diag, off, select="i", select_range=sel,
                            eigvals_only=True)
    return z, vals, None


def kittel_field(drive_GHz: float, b_sat_G: float,
                 gyromag_MHz_per_G: float = GYROMAGNETIC_MHZ_PER_G) -> float:
    """Uniform-mode resonance root of gamma sqrt(B (B + B_sat)) = f."""
    f = drive_GHz * 1e3
    return float((-b_sat_G + np.sqrt(b_sat_G ** 2 + 4 * (f / gyromag_MHz_per_G) ** 2)) / 2)


def swr_lines(model: SwrModel, drive_GHz: float, b0_start_G: float,
              b0_stop_G: float, n_scan: int = 161,
              n_modes: int = 40) -> list[SwrLine]:
    """Resonance lines where a width-mode eigenfrequency crosses the drive.

    The field scan is linear; crossings are interpolated between grid
    points.  Oscillator strength is |integral of psi dz|^2 / W for the
    unit-normalized mode (the strengths of a complete mode set sum to 1).
    A line is edge-localized when more than 60 percent of |psi|^2 lies
    within W/8 of either lateral edge.
    """
    if not b0_stop_G > b0_start_G > 0:
        raise ValueError("scan interval must be positive and increasing")
    f = drive_GHz * 1e3
    b0s = np.linspace(b0_start_G, b0_stop_G, n_scan)
    freqs = np.array([_eigenfrequencies(model, b, n_modes)[1] for b in b0s])
    w = model.geom.width_nm
    lines: list[SwrLine] = []
    for mode in range(freqs.shape[1]):
        gap = freqs[:, mode] - f
        crossings = np.where(np.sign(gap[:-1]) != np.sign(gap[1:]))[0]
        for i in crossings:
            frac = -gap[i] / (gap[i + 1] - gap[i])
            b_res = b0s[i] + frac * (b0s[i + 1] - b0s[i])
            z, _, vecs = _eigenfrequencies(model, b_res, mode + 1,
                                           with_vectors=True)
            dz = z[1] - z[0]
            psi = vecs[:, mode]
            psi = psi / np.sqrt(np.sum(psi ** 2) * dz)
            strength = float((np.sum(psi) * dz) ** 2 / w)
            edge_mass = float(np.sum(psi[np.abs(z) > w / 2 - w / 8] ** 2) * dz)
            lines.append(SwrLine(mode, float(b_res), strength, edge_mass > 0.6))
    # strengths are per-line mode weights; lines sit at different fields, so
    # the raw sum can creep above 1 by a fraction of a percent
    total = sum(ln.oscillator_strength for ln in lines)
    if total > 1.0:
        lines = [SwrLine(ln.mode_index, ln.resonance_field_G,
                         ln.oscillator_strength / total, ln.edge_localized)
                 for ln in lines]
    lines.sort(key=lambda ln: ln.resonance_field_G)
    return lines


@dataclass(frozen=True)
class OverlapReport:
    min_distance_G: float
    passed: bool
    pair_distances_G: tuple[float, ...]


def overlap_check(swr: list[SwrLine], epr_lines: list[tuple[float, float]],
                  swr_linewidth_G: float = 1.0) -> OverlapReport:
    """Spectral clearance between SWR lines and EPR lines.

    ``epr_lines`` holds (resonance field, linewidth) pairs.  For every
    pair the clearance is the field distance minus the summed
    half-linewidths; the check fails when any clearance is negative.
    """
    if not swr or not epr_lines:
        raise ValueError("both line lists must be non-empty")
    dists = []
    for s in swr:
        for b_epr, lw in epr_lines:
            d = abs(s.resonance_field_G - b_epr) - 0.5 * (swr_linewidth_G + lw)
            dists.append(float(d))
    dmin = min(dists)
    return OverlapReport(dmin, dmin >= 0.0, tuple(dists))
