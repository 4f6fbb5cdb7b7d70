"""Ion-implantation yield statistics for single-aperture probe creation.

A range/vacancy profile (vacancies per ion per nm of depth) combined with
an aperture mask and dose gives the Poisson mean of created centers per
device; everything downstream is Poisson arithmetic over device batches
and depth windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NM2_PER_CM2 = 1e14


class ProfileFormatError(ValueError):
    """Malformed implantation profile file."""


@dataclass(frozen=True)
class ImplantProfile:
    """Linear vacancy density versus depth below the semiconductor surface.

    ``depth_nm`` are sample positions (strictly increasing),
    ``density_per_ion_nm`` the vacancies created per incident ion and per
    nm of depth at each position.
    """

    depth_nm: np.ndarray
    density_per_ion_nm: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.depth_nm, float)
        v = np.asarray(self.density_per_ion_nm, float)
        if d.ndim != 1 or d.size < 2 or d.size != v.size:
            raise ProfileFormatError("profile needs matching depth/density columns")
        if np.any(np.diff(d) <= 0):
            raise ProfileFormatError("depth values must be strictly increasing")
        if np.any(v < 0):
            raise ProfileFormatError("densities cannot be negative")
        object.__setattr__(self, "depth_nm", d)
        object.__setattr__(self, "density_per_ion_nm", v)

    def vacancies_per_ion(self, z1_nm: float | None = None,
                          z2_nm: float | None = None) -> float:
        """Integral of the density over [z1, z2] (full support by default)."""
        z1 = self.depth_nm[0] if z1_nm is None else z1_nm
        z2 = self.depth_nm[-1] if z2_nm is None else z2_nm
        if z2 <= z1:
            return 0.0
        lo = max(z1, self.depth_nm[0])
        hi = min(z2, self.depth_nm[-1])
        if hi <= lo:
            return 0.0
        zs = np.unique(np.concatenate([[lo, hi], self.depth_nm[
            (self.depth_nm > lo) & (self.depth_nm < hi)]]))
        vs = np.interp(zs, self.depth_nm, self.density_per_ion_nm)
        return float(np.trapezoid(vs, zs))


@dataclass(frozen=True)
class ApertureSpec:
    diameter_nm: float
    dose_per_cm2: float
    decimation: float = 1.0

    def __post_init__(self):
        if self.diameter_nm <= 0 or self.dose_per_cm2 <= 0:
            raise ValueError("aperture diameter and dose must be positive")
        if not 0.0 < self.decimation <= 1.0:
            raise ValueError("decimation must lie in (0, 1]")

    @property
    def area_nm2(self) -> float:
        return math.pi * (self.diameter_nm / 2) ** 2


def parse_profile(path) -> ImplantProfile:
    """Read a two-column (depth_nm, density) text profile.

    Lines starting with '#' are comments.  A comment of the form
    ``# vacancies_per_ion = <value>`` rescales the density column so the
    full integral equals that value; otherwise the column is taken to be
    in vacancies per ion per nm already.
    """
    path = Path(path)
    depths, dens = [], []
    target_total = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("vacancies_per_ion"):
                try:
                    target_total = float(body.split("=", 1)[1])
                except (IndexError, ValueError) as exc:
                    raise ProfileFormatError(
                        f"{path.name}:{lineno}: bad vacancies_per_ion header") from exc
            continue
        cols = line.replace(",", " ").split()
        if len(cols) != 2:
            raise ProfileFormatError(
                f"{path.name}:{lineno}: expected two columns, got {len(cols)}")
        try:
            depths.append(float(cols[0]))
            dens.append(float(cols[1]))
        except ValueError as exc:
            raise ProfileFormatError(
                f"{path.name}:{lineno}: non-numeric value") from exc
    profile = ImplantProfile(np.array(depths), np.array(dens))
    if target_total is not None:
        raw_total = profile.vacancies_per_ion()
        if raw_total <= 0:
            raise ProfileFormatError(f"{path.name}: profile integrates to zero")
        profile = ImplantProfile(profile.depth_nm,
                                 profile.density_per_ion_nm * target_total / raw_total)
    return profile


def expected_count(profile: ImplantProfile, aperture: ApertureSpec,
                   window_nm: tuple[float, float] | None = None) -> float:
    """Poisson mean of created centers per aperture.

    lambda = dose * aperture area * decimation * integral of the density
    over the window (full profile when omitted).
    """
    z1, z2 = window_nm if window_nm is not None else (None, None)
    per_ion = profile.vacancies_per_ion(z1, z2)
    ions = aperture.dose_per_cm2 / NM2_PER_CM2 * aperture.area_nm2
    return ions * aperture.decimation * per_ion


def poisson_pmf(lam: float, k_max: int) -> np.ndarray:
    k = np.arange(k_max + 1)
    if lam == 0:
        out = np.zeros(k_max + 1)
        out[0] = 1.0
        return out
    log_p = -lam + k * math.log(lam) - np.array([math.lgamma(kk + 1) for kk in k])
    return np.exp(log_p)


def poisson_histogram(lam: float, n_devices: int,
                      coverage: float = 0.999) -> list[tuple[int, float, int]]:
    """Expected device counts per created-center number k.

    Returns (k, exact expectation, rounded display count) up to the
    smallest k_max whose cumulative probability reaches ``coverage``.
    """
    if lam < 0 or n_devices < 0:
        raise ValueError("lambda and device count must be nonnegative")
    k_max = 0
    while poisson_pmf(lam, k_max).sum() < coverage:
        k_max += 1
        if k_max > 10_000:
            raise ValueError("lambda too large for a sensible histogram")
    pmf = poisson_pmf(lam, k_max)
    return [(int(k), float(n_devices * p), int(round(n_devices * p)))
            for k, p in enumerate(pmf)]


def depth_window_probability(profile: ImplantProfile, z1_nm: float,
                             z2_nm: float) -> float:
    """Fraction of the vacancy distribution inside [z1, z2]."""
    if z2_nm < z1_nm:
        raise ValueError("window must satisfy z1 < z2")
    total = profile.vacancies_per_ion()
    if total <= 0:
        raise ValueError("profile integrates to zero")
    return profile.vacancies_per_ion(z1_nm, z2_nm) / total


def usable_yield(lam: float, p_window: float, n_devices: int) -> float:
    """Expected devices with exactly one center inside the depth window."""
    if not 0.0 <= p_window <= 1.0:
        raise ValueError("window probability must lie in [0, 1]")
    p1 = lam * math.exp(-lam)
    return n_devices * p1 * p_window
