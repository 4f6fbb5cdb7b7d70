"""TM band structure of a triangular lattice of air holes, by plane-wave
expansion, plus the design arithmetic tying normalized gap frequencies to
physical lattice dimensions.

The TM eigenproblem uses the inverse-permittivity-matrix rule: invert the
truncated eps(G - G') matrix, then diagonalize |k+G| eta |k+G'|.  All
frequencies are reported as the normalized a/lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j1


@dataclass(frozen=True)
class PhcLattice:
    """Triangular lattice of cylindrical holes.

    ``a_nm`` is only a physical scale tag; band structures are computed
    in normalized units and do not depend on it.
    """

    r_over_a: float
    eps_background: float = 6.25
    eps_hole: float = 1.0
    a_nm: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.r_over_a < 0.5:
            raise ValueError("r/a must lie in [0, 0.5)")
        if self.eps_background < 1.0 or self.eps_hole < 1.0:
            raise ValueError("relative permittivities must be >= 1")

    @property
    def fill_factor(self) -> float:
        return 2 * np.pi / np.sqrt(3.0) * self.r_over_a ** 2


# Reciprocal basis for a = 1: real-space a1 = (1, 0), a2 = (1/2, sqrt3/2).
B1 = 2 * np.pi * np.array([1.0, -1.0 / np.sqrt(3.0)])
B2 = 2 * np.pi * np.array([0.0, 2.0 / np.sqrt(3.0)])
GAMMA = np.zeros(2)
K_POINT = (B1 + 2 * B2) / 3.0
M_POINT = (B1 + B2) / 2.0


@dataclass(frozen=True)
class BandDiagram:
    k_points: np.ndarray            # (nk, 2) wavevectors, units 1/a
    k_labels: tuple[str, ...]       # segment tag per k-point
    bands: np.ndarray               # (nk, nbands) normalized a/lambda
    n_planewaves: int

    def segment(self, label: str) -> np.ndarray:
        mask = np.array([lab == label for lab in self.k_labels])
        return self.bands[mask]


@dataclass(frozen=True)
class GapReport:
    kind: str                   # "complete" or "partial:<segment>"
    lower_edge: float
    upper_edge: float
    below_band: int             # 1-based index of the band under the gap

    @property
    def center(self) -> float:
        return 0.5 * (self.lower_edge + self.upper_edge)

    @property
    def width(self) -> float:
        return self.upper_edge - self.lower_edge


def reciprocal_vectors(n_side: int) -> np.ndarray:
    """(n_side^2, 2) reciprocal lattice vectors on a centered grid."""
    if n_side % 2 == 0:
        raise ValueError("n_side must be odd so the grid is centered")
    half = n_side // 2
    out = [m * B1 + n * B2 for m in range(-half, half + 1)
           for n in range(-half, half + 1)]
    return np.array(out)


def epsilon_fourier(lat: PhcLattice, g_vectors: np.ndarray) -> np.ndarray:
    """Matrix of eps Fourier coefficients eps(G_i - G_j).

    eps(0) is the filled-cell average; for G != 0 the circular hole gives
    (eps_hole - eps_bg) * 2 f J1(|G| r)/(|G| r).  Real and symmetric for
    this centrosymmetric structure.
    """
    f = lat.fill_factor
    diff = g_vectors[:, None, :] - g_vectors[None, :, :]
    q = np.linalg.norm(diff, axis=2)
    r = lat.r_over_a  # a = 1 units
    out = np.empty_like(q)
    on_diag = q < 1e-12
    x = q[~on_diag] * r
    if r > 0:
        out[~on_diag] = (lat.eps_hole - lat.eps_background) * 2 * f * j1(x) / x
    else:
        out[~on_diag] = 0.0
    out[on_diag] = f * lat.eps_hole + (1 - f) * lat.eps_background
    return out


def k_path(points_per_segment: int = 32):
    """Gamma-K-M-Gamma path; returns (k array, segment labels)."""
    if points_per_segment < 24:
        raise ValueError("use at least 24 points per segment")
    segs = [("GK", GAMMA, K_POINT), ("KM", K_POINT, M_POINT),
            ("MG", M_POINT, GAMMA)]
    ks, labels = [], []
    for name, p, q in segs:
        for t in np.linspace(0.0, 1.0, points_per_segment, endpoint=False):
            ks.append(p + t * (q - p))
            labels.append(name)
    ks.append(GAMMA)
    labels.append("MG")
    return np.array(ks), tuple(labels)


def tm_bands(lat: PhcLattice, k_points=None, k_labels=None,
             n_planewaves: int = 441, n_bands: int = 12) -> BandDiagram:
    """Lowest TM bands along a k path.

    ``n_planewaves`` must be an odd square (169, 441, ...); the Hermitian
    operator per k-point is |k+G| inv(eps)(G,G') |k+G'|.
    """
    n_side = int(round(np.sqrt(n_planewaves)))
    if n_side * n_side != n_planewaves or n_side % 2 == 0:
        raise ValueError("n_planewaves must be an odd square, e.g. 169 or 441")
    if n_planewaves < 169:
        raise ValueError("need at least 169 plane waves")
    if k_points is None:
        k_points, k_labels = k_path()
    k_points = np.asarray(k_points, float)
    if k_labels is None:
        k_labels = tuple("path" for _ in k_points)
    g = reciprocal_vectors(n_side)
    eta = np.linalg.inv(epsilon_fourier(lat, g))
    bands = np.empty((len(k_points), n_bands))
    for i, k in enumerate(k_points):
        kg = np.linalg.norm(k[None, :] + g, axis=1)
        op = kg[:, None] * eta * kg[None, :]
        op = 0.5 * (op + op.T)
        w2 = np.linalg.eigvalsh(op)
        if not np.all(np.isfinite(w2)):
            raise ArithmeticError(f"eigensolver failure at k = {tuple(k)}")
        bands[i] = np.sqrt(np.clip(w2[:n_bands], 0.0, None)) / (2 * np.pi)
    return BandDiagram(k_points, tuple(k_labels), bands, n_planewaves)


def find_gaps(diagram: BandDiagram, segment: str | None = None,
              max_freq: float = 0.8, min_width: float = 1e-3) -> list[GapReport]:
    """Band gaps below ``max_freq``, complete or restricted to a segment.

    A gap between consecutive bands is the interval between the lower
    band's maximum and the upper band's minimum over the considered
    k-points; touching bands (width below ``min_width``) are not
    reported.
    """
    bands = diagram.bands if segment is None else diagram.segment(segment)
    if bands.size == 0:
        raise ValueError(f"no k-points on segment {segment!r}")
    kind = "complete" if segment is None else f"partial:{segment}"
    gaps = []
    for n in range(bands.shape[1] - 1):
        lo = float(bands[:, n].max())
        hi = float(bands[:, n + 1].min())
        if hi - lo > min_width and lo < max_freq:
            gaps.append(GapReport(kind, lo, hi, n + 1))
    return gaps


def lattice_from_zpl(zpl_nm: float, omega_norm: float,
                     r_over_a: float) -> tuple[float, float]:
    """Physical (lattice constant, hole diameter) in nm placing a gap
    frequency at the zero-phonon line: a = lambda * (a/lambda)."""
    if min(zpl_nm, omega_norm, r_over_a) <= 0:
        raise ValueError("all design inputs must be positive")
    a = zpl_nm * omega_norm
    return a, 2 * r_over_a * a


def nanobeam_widths(zpl_nm: float, max_m: int = 3) -> list[tuple[float, bool]]:
    """Half-wavelength resonant beam widths m*lambda/2 for m = 1..max_m.

    The boolean marks widths (odd m) that put a field anti-node at the
    beam center, where the emitter dipole sits.
    """
    if max_m < 1:
        raise ValueError("max_m must be at least 1")
    return [(m * zpl_nm / 2.0, m % 2 == 1) for m in range(1, max_m + 1)]
