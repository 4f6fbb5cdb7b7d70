"""Photon shot-noise SNR budget for optically detected pump-probe runs.

Everything here is closed-form arithmetic on a budget of collection,
detection and excitation parameters.  The optimum single-shot ratio is

    R_opt = exp(-2 t0 / T2) sqrt(p_coll p_det (sigma/A) (P0 T / h nu) <Phi>)

and the observed ratio scales with the dipolar contrast (1 - V), the
photoluminescence spin contrast for off-resonant readout, and the square
root of the number of averaged cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, sqrt

from .constants import photon_energy_J


@dataclass(frozen=True)
class SnrBudget:
    """Inputs of the shot-noise budget.

    Quantum yields ``phi_high``/``phi_low`` are optional; when both are
    given, the contrast ``x_contrast`` and the mean yield are derived
    from them and any supplied values are replaced.  Otherwise
    ``x_contrast`` and ``phi_mean`` are taken as given.
    """

    t0_us: float = 6.25
    t2_us: float = 12.5
    p_coll: float = 0.5
    p_det: float = 0.4
    sigma_over_area: float = 1.0
    power_W: float = 20e-6
    wavelength_nm: float = 780.0
    integration_time_us: float = 1.0
    x_contrast: float = 0.02
    phi_mean: float = 1.0
    phi_high: float | None = None
    phi_low: float | None = None
    n_cycles: int = 5000
    t_rep_us: float = 200.0

    def __post_init__(self):
        for name in ("p_coll", "p_det"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.sigma_over_area <= 1.0:
            raise ValueError("sigma/A must lie in (0, 1]")
        if self.t2_us <= 0 or self.power_W <= 0:
            raise ValueError("T2 and optical power must be positive")
        if self.phi_high is not None and self.phi_low is not None:
            for v in (self.phi_high, self.phi_low):
                if not 0.0 <= v <= 1.0:
                    raise ValueError("quantum yields must lie in [0, 1]")
            x = contrast_from_yields(self.phi_high, self.phi_low)
            object.__setattr__(self, "x_contrast", x)
            object.__setattr__(self, "phi_mean",
                               0.5 * (self.phi_high + self.phi_low))
        if not -1.0 <= self.x_contrast <= 1.0:
            raise ValueError("contrast must lie in [-1, 1]")


def contrast_from_yields(phi_high: float, phi_low: float) -> float:
    """Spin contrast X = (Phi_H - Phi_L) / (Phi_H + Phi_L)."""
    s = phi_high + phi_low
    if s <= 0:
        raise ValueError("yields cannot both be zero")
    return (phi_high - phi_low) / s


def r_opt(budget: SnrBudget) -> float:
    """Optimum single-shot shot-noise SNR of the budget."""
    photons = (budget.power_W * budget.integration_time_us * 1e-6
               / photon_energy_J(budget.wavelength_nm))
    return exp(-2 * budget.t0_us / budget.t2_us) * sqrt(
        budget.p_coll * budget.p_det * budget.sigma_over_area
        * photons * budget.phi_mean)


def snr_single_shot(budget: SnrBudget, v_deer: float,
                    mode: str = "off_resonant") -> float:
    """Single-shot SNR given the dipolar signal V.

    Off-resonant readout pays the spin-contrast factor X; resonant
    (spin-selective) readout does not.
    """
    if not 0.0 <= v_deer <= 1.0:
        raise ValueError("V must lie in [0, 1]")
    base = r_opt(budget) * (1.0 - v_deer)
    if mode == "off_resonant":
        return base * budget.x_contrast
    if mode == "resonant":
        return base
    raise ValueError(f"unknown mode {mode!r}")


def averaged_snr(r: float, n_cycles: int) -> float:
    """SNR after averaging n cycles: R sqrt(n)."""
    if n_cycles < 1:
        raise ValueError("n_cycles must be at least 1")
    return r * sqrt(n_cycles)


def ensemble_snr(r: float, n_probes: int) -> float:
    """SNR with n identical probe spins at the same depth: R sqrt(n)."""
    if n_probes < 1:
        raise ValueError("n_probes must be at least 1")
    return r * sqrt(n_probes)


def experiment_time_s(n_cycles: int, t_rep_us: float, n_points: int) -> float:
    """Total wall time of n_points spectrum points at n_cycles each."""
    if n_cycles < 1 or t_rep_us <= 0 or n_points < 0:
        raise ValueError("cycle count and repetition time must be positive")
    return n_cycles * t_rep_us * 1e-6 * n_points


def collection_efficiency(coupler_efficiency: float,
                          gap_type: str = "isotropic") -> float:
    """Photon collection probability of the waveguide-fiber chain.

    An isotropic in-plane bandgap funnels every guided photon into the
    waveguide; a direction-partial bandgap keeps only the cos^2 projection
    onto the guide axis, which averages to 1/2.
    """
    if not 0.0 <= coupler_efficiency <= 1.0:
        raise ValueError("coupler efficiency must lie in [0, 1]")
    if gap_type == "isotropic":
        return coupler_efficiency
    if gap_type == "partial":
        return 0.5 * coupler_efficiency
    raise ValueError(f"unknown gap type {gap_type!r}")
